#include "dg/logderiv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double t) {
    double c = std::fmod(t, kTwoPi);
    return c < 0 ? c + kTwoPi : c;
}

// zeros with g in [g_lo, g_hi]
std::pair<std::size_t, std::size_t> g_range(const ZeroCloud& cloud, double g_lo, double g_hi) {
    auto lo = std::lower_bound(cloud.zeros.begin(), cloud.zeros.end(), g_lo,
                               [](const Zero& z, double g) { return z.g < g; });
    auto hi = std::upper_bound(cloud.zeros.begin(), cloud.zeros.end(), g_hi,
                               [](double g, const Zero& z) { return g < z.g; });
    return {static_cast<std::size_t>(lo - cloud.zeros.begin()), static_cast<std::size_t>(hi - cloud.zeros.begin())};
}

// zeros whose radius is within h of 1 - e^{-g}
std::pair<std::size_t, std::size_t> band(const ZeroCloud& cloud, double g, double h) {
    double t = std::exp(-g);
    double g_lo = -std::log(t + h);
    double g_hi = t > h ? -std::log(t - h) : std::numeric_limits<double>::infinity();
    return g_range(cloud, g_lo, g_hi);
}

// d/dz log of (z - w)/(1 - conj(w) z), z = (gz, tz), w = (gw, tw)
std::complex<double> blaschke_logderiv(double gz, double tz, double gw, double tw) {
    double tr = std::exp(-gz), tp = std::exp(-gw);
    double r = -std::expm1(-gz), p = -std::expm1(-gw);
    double d = std::remainder(tz - tw, kTwoPi);
    std::complex<double> e_m1(-2.0 * std::sin(0.5 * d) * std::sin(0.5 * d), std::sin(d));  // e^{id} - 1
    std::complex<double> z_minus_w = std::polar(1.0, tw) * ((tp - tr) + r * e_m1);
    std::complex<double> one_minus = (tp + p * tr) - p * r * e_m1;  // 1 - conj(w) z
    std::complex<double> wbar = std::polar(p, -tw);
    return 1.0 / z_minus_w + wbar / one_minus;
}

}  // namespace

void RadialWindowSet::normalize() {
    std::vector<std::pair<double, double>> v;
    for (const auto& iv : intervals)
        if (iv.second > iv.first) v.push_back(iv);
    std::sort(v.begin(), v.end());
    intervals.clear();
    for (const auto& iv : v) {
        if (!intervals.empty() && iv.first <= intervals.back().second)
            intervals.back().second = std::max(intervals.back().second, iv.second);
        else
            intervals.push_back(iv);
    }
}

LogValue i_alpha(const LogMModel& model, double alpha, LogGap R, LogGap R0) {
    if (!(alpha >= 0.5 && alpha < 1.0)) throw std::invalid_argument("i_alpha: alpha must lie in [1/2, 1)");
    if (!(R0.g < R.g)) throw std::invalid_argument("i_alpha: need R0 < R");
    double G = R.g, beta = 1.0 / alpha - 1.0;
    // t = 1 - e^{-u}: dt = e^{-u} du, R - t = e^{-u} (1 - e^{-(G-u)})
    auto f = [&](double u, double gap) {
        double m = model.log_plus_M(u);
        if (m == 0) return 0.0;
        double w = beta == 0 ? 1.0 : std::pow(-std::expm1(-gap), beta);
        return m * std::exp(-u / alpha) * w;
    };
    double J = G > 0 ? integrate_upper_singular(f, 0.0, G) : 0.0;
    double total = J + model.log_plus_M(R0.g);
    if (total <= 0) return LogValue::zero();
    return LogValue::from_log(G / alpha + std::log(total));
}

RadialWindowSet loworder_windows(double lambda, double eta, const std::vector<double>& g_n) {
    if (!(lambda > 0 && eta > 0)) throw std::invalid_argument("loworder_windows: need lambda > 0, eta > 0");
    double q = (lambda + 0.5 * eta) / (lambda + eta);
    RadialWindowSet s;
    for (double g : g_n) s.intervals.emplace_back(g * q, g);
    s.normalize();
    return s;
}

DensityResult upper_density(RadialWindowSet set) {
    set.normalize();
    DensityResult res;
    const auto& iv = set.intervals;
    if (iv.empty()) {
        res.flagged = true;
        return res;
    }
    if (std::isinf(iv.back().second)) {
        res.value = 1.0;
        res.resolved = 1;
        return res;
    }
    const double b_last = iv.back().second;
    const double horizon = 40.0;  // truncated tail weighs at most e^{-40}
    std::vector<double> ratios;
    // suffix sums of m(E cap [r,1)) relative to the current left endpoint
    double suffix = 0;
    std::vector<double> all(iv.size());
    for (std::size_t i = iv.size(); i-- > 0;) {
        double a = iv[i].first, b = iv[i].second;
        double next_shift = i + 1 < iv.size() ? iv[i + 1].first - a : 0.0;
        suffix = -std::expm1(-(b - a)) + suffix * std::exp(-next_shift);
        all[i] = suffix;
    }
    for (std::size_t i = 0; i < iv.size(); ++i)
        if (b_last - iv[i].first >= horizon) ratios.push_back(all[i]);
    res.resolved = static_cast<int>(ratios.size());
    if (ratios.empty()) {
        res.flagged = true;
        return res;
    }
    res.value = *std::max_element(ratios.begin() + static_cast<std::ptrdiff_t>(ratios.size() / 2), ratios.end());
    return res;
}

double disc_distance(double g1, double t1, double g2, double t2) {
    double dr = std::exp(-g2) - std::exp(-g1);
    double r1 = -std::expm1(-g1), r2 = -std::expm1(-g2);
    double s = std::sin(0.5 * std::remainder(t1 - t2, kTwoPi));
    return std::sqrt(dr * dr + 4.0 * r1 * r2 * s * s);
}

ZeroCount zero_counts(const ZeroCloud& cloud, double g_zeta, double t_zeta, double h) {
    if (!(h > 0 && h < std::exp(-g_zeta))) throw std::invalid_argument("zero_counts: need 0 < h < 1 - |zeta|");
    ZeroCount zc;
    auto [i0, i1] = band(cloud, g_zeta, h);
    for (std::size_t i = i0; i < i1; ++i) {
        const Zero& z = cloud.zeros[i];
        double d = disc_distance(g_zeta, t_zeta, z.g, z.theta);
        if (d > h) continue;
        zc.n += z.mult;
        zc.N += z.mult * (d > 0 ? std::log(h / d) : std::numeric_limits<double>::infinity());
    }
    return zc;
}

double j_integral(const ZeroCloud& cloud, double gz, double tz, LogGap R, double rel_tol) {
    if (gz == R.g) throw std::invalid_argument("j_integral: need |z| != R");
    const double gR = R.g;
    const double h = std::exp(-gR) / 16.0;
    const double rR = -std::expm1(-gR), tR = std::exp(-gR);
    auto [i0, i1] = band(cloud, gR, h);

    struct Arc {
        double lo, hi;
        std::size_t zero;
    };
    std::vector<Arc> arcs;
    for (std::size_t i = i0; i < i1; ++i) {
        const Zero& z = cloud.zeros[i];
        double p = -std::expm1(-z.g);
        double d = std::exp(-z.g) - tR;
        double s2 = (h * h - d * d) / (4.0 * rR * p);
        if (s2 <= 0) continue;
        double half = s2 >= 1 ? std::numbers::pi : 2.0 * std::asin(std::sqrt(s2));
        double c = wrap(z.theta);
        double lo = c - half, hi = c + half;
        if (lo < 0) {
            arcs.push_back({lo + kTwoPi, kTwoPi, i});
            lo = 0;
        }
        if (hi > kTwoPi) {
            arcs.push_back({0.0, hi - kTwoPi, i});
            hi = kTwoPi;
        }
        arcs.push_back({lo, hi, i});
    }
    if (arcs.empty()) return 0.0;
    std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) { return a.lo < b.lo; });

    QuadOptions qo;
    qo.rel_tol = rel_tol;
    double total = 0;
    std::size_t a = 0;
    while (a < arcs.size()) {
        double lo = arcs[a].lo, hi = arcs[a].hi;
        std::size_t b = a + 1;
        while (b < arcs.size() && arcs[b].lo <= hi) hi = std::max(hi, arcs[b++].hi);
        std::vector<std::size_t> zs;
        std::vector<double> cuts{lo, hi};
        for (std::size_t m = a; m < b; ++m) {
            zs.push_back(arcs[m].zero);
            for (double c : {arcs[m].lo, arcs[m].hi, wrap(cloud.zeros[arcs[m].zero].theta)})
                if (c > lo && c < hi) cuts.push_back(c);
        }
        double tzw = wrap(tz);
        if (tzw > lo && tzw < hi) cuts.push_back(tzw);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        auto f = [&](double th) {
            double N = 0;
            for (std::size_t i : zs) {
                double d = disc_distance(gR, th, cloud.zeros[i].g, cloud.zeros[i].theta);
                if (d < h) N += cloud.zeros[i].mult * std::log(h / d);
            }
            if (N == 0) return 0.0;
            double w = disc_distance(gR, th, gz, tz);
            return N / (w * w);
        };
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) total += integrate(f, cuts[c], cuts[c + 1], qo);
        a = b;
    }
    return total;
}

int sector_crowding(const ZeroCloud& cloud, LogGap g) {
    auto [i0, i1] = g_range(cloud, g.g, g.g + std::log(2.0));
    if (i0 >= i1) return 0;
    double width = 0.5 * std::numbers::pi * g.one_minus_r();
    std::vector<std::pair<double, int>> pts;
    int all = 0;
    for (std::size_t i = i0; i < i1; ++i) {
        pts.emplace_back(wrap(cloud.zeros[i].theta), cloud.zeros[i].mult);
        all += cloud.zeros[i].mult;
    }
    if (width >= kTwoPi) return all;
    std::sort(pts.begin(), pts.end());
    std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) pts.emplace_back(pts[i].first + kTwoPi, pts[i].second);
    int best = 0, cur = 0;
    std::size_t hi = 0;
    for (std::size_t lo = 0; lo < n; ++lo) {
        if (hi < lo) hi = lo, cur = 0;
        while (hi < lo + n && pts[hi].first <= pts[lo].first + width) cur += pts[hi++].second;
        best = std::max(best, cur);
        cur -= pts[lo].second;
    }
    return best;
}

double exclusion_radius(double g) { return std::exp(-g) / std::max(g - 1.0, 1.0); }

CertificateReport logderiv_certificate(const LogDerivSpec& f, int k, int j, double eps,
                                       const RadialWindowSet& windows, const CertificateOptions& opt) {
    if (!(k > j && j >= 0)) throw std::invalid_argument("logderiv_certificate: need k > j >= 0");
    if (!(eps > 0)) throw std::invalid_argument("logderiv_certificate: need eps > 0");
    bool closed = static_cast<bool>(f.log_abs_ratio);
    if (!closed && !f.cloud) throw std::invalid_argument("logderiv_certificate: no closed form and no zero cloud");
    if (!closed && (k != 1 || j != 0))
        throw std::invalid_argument("logderiv_certificate: cloud-based input supports k = 1, j = 0 only");

    CertificateReport rep;
    double lift = f.sigma > 0 ? std::max(f.lambda - f.lambda / f.sigma, 0.0) : 0.0;
    rep.exponent = 2.0 + lift + eps;
    if (f.cloud)
        rep.note = "exclusion uses zeros of f only; zeros of intermediate derivatives are not available";

    double log_C = kNegInf;
    for (const auto& [a, b_raw] : windows.intervals) {
        double b = std::isinf(b_raw) ? a + 10.0 : b_raw;
        WindowReport w;
        w.g_lo = a;
        w.g_hi = b;
        std::vector<double> radii;
        if (opt.dyadic)
            for (int nu = std::max(1, static_cast<int>(std::ceil(a / std::log(2.0)))); nu * std::log(2.0) <= b; ++nu)
                radii.push_back(nu * std::log(2.0));
        if (radii.empty())
            for (int i = 0; i < opt.radii_per_window; ++i)
                radii.push_back(a + (b - a) * i / std::max(opt.radii_per_window - 1, 1));

        double log_max = kNegInf;
        for (double g : radii) {
            double excl = 1.0 / std::max(g - 1.0, 1.0);
            if (f.cloud) {
                double arc = excluded_arc(*f.cloud, g, excl);
                double r = -std::expm1(-g);
                w.excluded_measure = std::max(w.excluded_measure, arc / r);
                rep.arc_constant = std::max(rep.arc_constant, arc / exclusion_radius(g));
            }
            for (int i = 0; i < opt.n_theta; ++i) {
                double th = kTwoPi * i / opt.n_theta;
                ++w.samples;
                if (f.cloud && in_excluded_set(*f.cloud, g, th, excl)) {
                    ++w.excluded;
                    continue;
                }
                double lr;
                if (closed) {
                    lr = f.log_abs_ratio(g, th);
                } else {
                    std::complex<double> s = f.smooth_logderiv ? f.smooth_logderiv(g, th) : 0.0;
                    for (const Zero& z : f.cloud->zeros) s += static_cast<double>(z.mult) * blaschke_logderiv(g, th, z.g, z.theta);
                    lr = std::log(std::abs(s));
                }
                log_max = std::max(log_max, lr / (k - j) - rep.exponent * g);
            }
        }
        w.max_statistic = std::exp(log_max);
        log_C = std::max(log_C, log_max);
        rep.windows.push_back(w);
    }
    rep.fitted_C = std::exp(log_C);
    return rep;
}

}  // namespace dg
