#include "dg/riesz.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace dg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Annulus {
    CellKind kind;
    int generation;
    double g_lo, g_hi;
    double a;
    bool p1_branch = false;  // b includes -p1 e^{g'}
    double p1 = 0, g_prime = 0;
    bool has_M = false;
    double log_M = 0;

    double beta(double g) const {
        double b = 0;
        if (has_M) b += std::exp(log_M - 2.0 * g);
        if (p1_branch) b -= p1 * std::exp(g_prime - 2.0 * g);
        return b;
    }
    double next(double g) const {
        return p1_branch ? next_ring_radius_p1(g, p1, g_prime) : next_ring_radius(g, a);
    }
};

std::int64_t checked_count(double x) {
    if (!(x < 9.0e18)) throw std::range_error("cell count per ring exceeds 64-bit range; lower g_max");
    return static_cast<std::int64_t>(x);
}

void add_annulus(Partition& part, const Annulus& an, double g_max) {
    if (!(an.g_hi > an.g_lo) || an.g_lo >= g_max) return;
    auto merged_ring = [&](double lo, double hi) {
        Ring R;
        R.generation = an.generation;
        R.annulus = an.kind;
        R.g_lo = lo;
        R.g_hi = hi;
        R.a = an.a;
        R.beta = an.beta(lo);
        R.ring_mass = radial_mass(R.a, R.beta, lo, hi);
        R.merged = true;
        R.n_cells = std::max<std::int64_t>(1, checked_count(std::floor(R.ring_mass / 2.0)));
        R.cell_angle = R.ring_mass >= 2.0 ? kTwoPi * 2.0 / R.ring_mass : kTwoPi;
        return R;
    };
    if (an.kind == CellKind::A_star) {
        part.rings.push_back(merged_ring(an.g_lo, an.g_hi));
        return;
    }
    double g = an.g_lo;
    while (g < g_max) {
        double gn = an.next(g);
        if (gn >= an.g_hi) {
            // fold the partial ring into the previous one
            double lo = g;
            if (!part.rings.empty() && part.rings.back().generation == an.generation &&
                part.rings.back().annulus == an.kind && !part.rings.back().merged) {
                lo = part.rings.back().g_lo;
                part.rings.pop_back();
            }
            part.rings.push_back(merged_ring(lo, an.g_hi));
            return;
        }
        Ring R;
        R.generation = an.generation;
        R.annulus = an.kind;
        R.g_lo = g;
        R.g_hi = gn;
        R.a = an.a;
        R.beta = an.beta(g);
        R.ring_mass = radial_mass(R.a, R.beta, g, gn);
        R.n_cells = checked_count(std::floor(std::exp(g)));
        R.cell_angle = kTwoPi / static_cast<double>(R.n_cells);
        part.rings.push_back(R);
        g = gn;
    }
}

std::vector<Annulus> annuli_of(const PiecewiseProfile& prof, int n) {
    const auto& sc = prof.scaffold();
    const auto& P = sc.params;
    int N = prof.generation_count();
    std::vector<Annulus> out;
    auto [lo1, hi1] = prof.branch_range(n, 1);
    double eps = n <= N ? sc.generations[n - 1].eps : sc.generations[N - 1].eps_next;
    out.push_back({CellKind::A, n, lo1, hi1, P.p2 + eps});
    if (n > N) return out;
    const Generation& G = sc.generations[n - 1];
    Annulus h{CellKind::A_hat, n, G.g_prime, G.g_hat, P.p1, true, P.p1, G.g_prime};
    Annulus s = h;
    s.kind = CellKind::A_star;
    s.g_lo = G.g_hat;
    s.g_hi = G.g_star;
    s.has_M = true;
    s.log_M = G.M.logmag;
    Annulus d = h;
    d.kind = CellKind::A_dprime;
    d.g_lo = G.g_star;
    d.g_hi = G.g_dprime;
    out.push_back(h);
    out.push_back(s);
    out.push_back(d);
    return out;
}

}  // namespace

const char* to_string(CellKind k) {
    switch (k) {
        case CellKind::A: return "A";
        case CellKind::A_hat: return "A-hat";
        case CellKind::A_dprime: return "A-dprime";
        case CellKind::A_star: return "A-star";
        case CellKind::remainder: return "remainder";
    }
    return "?";
}

double PolarCell::aspect() const {
    double radial = r_diff(g_lo, g_hi);
    double arc = -std::expm1(-0.5 * (g_lo + g_hi)) * dtheta;
    return std::max(radial, arc) / std::min(radial, arc);
}

double next_ring_radius(double g_k, double p_eff) {
    if (!(p_eff > 0)) throw std::invalid_argument("p_eff must be positive");
    double m = std::floor(std::exp(g_k));
    double c = 2.0 * m * std::exp(-g_k) / p_eff;
    return g_k + std::log1p(c);
}

double next_ring_radius_p1(double g_k, double p1, double g_prime) {
    // y = x_{k+1}/x_k, z = y - 1 solves z^2 + (1 - kappa - c) z - c = 0
    double m = std::floor(std::exp(g_k));
    double c = 2.0 * m * std::exp(-g_k) / p1;
    double kappa = std::exp(g_prime - 2.0 * g_k);
    double B = 1.0 - kappa - c;
    double D = std::sqrt(B * B + 4.0 * c);
    double z = B >= 0 ? 2.0 * c / (B + D) : 0.5 * (D - B);
    return g_k + std::log1p(z);
}

double radial_mass(double a, double beta, double g_lo, double g_hi) {
    double d = g_hi - g_lo;
    return std::exp(g_lo) * (a * std::expm1(d) - beta * std::expm1(-d));
}

double Partition::total_cells() const {
    double s = 0;
    for (const auto& R : rings) s += static_cast<double>(R.n_cells);
    return s;
}

PolarCell Partition::cell(std::size_t ring, std::int64_t j) const {
    const Ring& R = rings.at(ring);
    if (j < 0 || j >= R.n_cells) throw std::out_of_range("cell index outside ring");
    PolarCell c;
    c.g_lo = R.g_lo;
    c.g_hi = R.g_hi;
    c.generation = R.generation;
    c.annulus = R.annulus;
    c.kind = R.annulus;
    c.a = R.a;
    c.beta = R.beta;
    double jd = static_cast<double>(j);
    c.theta_lo = jd * R.cell_angle;
    bool last = j == R.n_cells - 1;
    c.theta_hi = last ? kTwoPi : (jd + 1.0) * R.cell_angle;
    c.dtheta = (R.merged && last) ? kTwoPi - c.theta_lo : R.cell_angle;
    if (R.merged && last) {
        c.kind = CellKind::remainder;
        c.mass = R.ring_mass - 2.0 * jd;
    } else if (R.merged) {
        c.mass = 2.0;
    } else {
        c.mass = R.ring_mass / static_cast<double>(R.n_cells);
    }
    return c;
}

TruncationReport Partition::enumerate(const std::function<void(const PolarCell&)>& fn, std::int64_t ceiling) const {
    TruncationReport rep;
    rep.total = total_cells();
    for (std::size_t i = 0; i < rings.size(); ++i) {
        for (std::int64_t j = 0; j < rings[i].n_cells; ++j) {
            if (rep.enumerated >= ceiling) {
                rep.truncated = true;
                return rep;
            }
            fn(cell(i, j));
            ++rep.enumerated;
        }
    }
    return rep;
}

Partition partition_region(const PiecewiseProfile& prof, int generation, double g_max) {
    Partition part;
    part.g_max = g_max;
    for (const auto& an : annuli_of(prof, generation)) add_annulus(part, an, g_max);
    return part;
}

Partition partition_all(const PiecewiseProfile& prof, double g_max) {
    Partition part;
    part.g_max = g_max;
    for (int n = 1; n <= prof.generation_count() + 1; ++n) {
        if (prof.branch_range(n, 1).first >= g_max) break;
        for (const auto& an : annuli_of(prof, n)) add_annulus(part, an, g_max);
    }
    return part;
}

int ZeroCloud::total_multiplicity() const {
    int s = 0;
    for (const auto& z : zeros) s += z.mult;
    return s;
}

double radial_centroid(double a, double beta, double g_lo, double g_hi) {
    double d = g_hi - g_lo;
    double num = a * d - beta * 0.5 * std::expm1(-2.0 * d);
    double den = a * std::expm1(d) - beta * std::expm1(-d);
    return g_lo - std::log(num / den);
}

ZeroCloud atomize(const std::vector<PolarCell>& cells) {
    ZeroCloud cl;
    cl.cells = cells;
    std::vector<Zero> zs;
    std::vector<std::size_t> src;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        double g = radial_centroid(c.a, c.beta, c.g_lo, c.g_hi);
        double w = c.dtheta;
        if (c.kind == CellKind::remainder && c.mass >= 3.0) {
            zs.push_back({g, c.theta_lo + 0.25 * w, 2, c.kind});
            zs.push_back({g, c.theta_lo + 0.75 * w, 2, c.kind});
            src.push_back(i);
            src.push_back(i);
        } else {
            zs.push_back({g, c.theta_lo + 0.5 * w, 2, c.kind});
            src.push_back(i);
        }
    }
    std::vector<std::size_t> idx(zs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return zs[x].g < zs[y].g; });
    for (auto i : idx) {
        cl.zeros.push_back(zs[i]);
        cl.source.push_back(src[i]);
    }
    return cl;
}

ZeroCloud atomize(const Partition& part, std::int64_t ceiling) {
    std::vector<PolarCell> cells;
    auto rep = part.enumerate([&](const PolarCell& c) { cells.push_back(c); }, ceiling);
    if (rep.truncated) throw std::length_error("partition exceeds the cell ceiling; lower g_max");
    return atomize(cells);
}

double log_pseudo_hyperbolic(double gz, double tz, double gw, double tw) {
    double tr = std::exp(-gz), tp = std::exp(-gw);
    double r = -std::expm1(-gz), p = -std::expm1(-gw);
    double s = std::sin(0.5 * (tz - tw));
    double cross = 4.0 * r * p * s * s;
    double d = tp - tr;
    double num = d * d + cross;
    if (num == 0.0) return kNegInf;
    double om = tr + tp - tr * tp;  // 1 - r p
    double den = om * om + cross;
    return 0.5 * (std::log(num) - std::log(den));
}

namespace {

// mu-density per dg dtheta: (a e^g + beta e^{2 g_lo - g}) / (2 pi)
double cell_weight(const PolarCell& c, double g) {
    return (c.a * std::exp(g) + c.beta * std::exp(2.0 * c.g_lo - g)) / kTwoPi;
}

double cell_distance2(const PolarCell& c, double gz, double tz) {
    double gm = 0.5 * (c.g_lo + c.g_hi), tm = 0.5 * (c.theta_lo + c.theta_hi);
    double tr = std::exp(-gz), tp = std::exp(-gm);
    double r = -std::expm1(-gz), p = -std::expm1(-gm);
    double s = std::sin(0.5 * (tz - tm));
    return (tp - tr) * (tp - tr) + 4.0 * r * p * s * s;
}

}  // namespace

double cell_log_potential(const PolarCell& c, double gz, double tz) {
    double radial = r_diff(c.g_lo, c.g_hi);
    double arc = -std::expm1(-c.g_lo) * c.dtheta;
    double diam2 = radial * radial + arc * arc;
    auto f = [&](double g, double th) { return log_pseudo_hyperbolic(gz, tz, g, th) * cell_weight(c, g); };
    if (cell_distance2(c, gz, tz) > 9.0 * diam2) {
        using Q = boost::math::quadrature::gauss<double, 7>;
        double hg = 0.5 * (c.g_hi - c.g_lo), mg = 0.5 * (c.g_hi + c.g_lo);
        double ht = 0.5 * c.dtheta, mt = c.theta_lo + ht;
        double s = 0;
        const auto& x = Q::abscissa();
        const auto& w = Q::weights();
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (int si : {1, -1}) {
                if (i == 0 && si == -1) continue;
                double g = mg + si * hg * x[i];
                for (std::size_t k = 0; k < x.size(); ++k) {
                    for (int sk : {1, -1}) {
                        if (k == 0 && sk == -1) continue;
                        s += w[i] * w[k] * f(g, mt + sk * ht * x[k]);
                    }
                }
            }
        }
        return s * hg * ht;
    }
    // near field: split at the point's coordinates so the log singularity sits on
    // panel edges, where tanh-sinh copes with it
    static thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
    auto fin = [&](double g, double th) {
        double v = f(g, th);
        return std::isfinite(v) ? v : 0.0;
    };
    double tzz = tz;
    while (tzz < c.theta_lo) tzz += kTwoPi;
    while (tzz >= c.theta_lo + kTwoPi) tzz -= kTwoPi;
    auto seg = [&](auto&& h, double lo, double hi) { return ts.integrate(h, lo, hi, 1e-10); };
    auto inner = [&](double g) {
        auto h = [&](double th) { return fin(g, th); };
        if (tzz > c.theta_lo && tzz < c.theta_hi) return seg(h, c.theta_lo, tzz) + seg(h, tzz, c.theta_hi);
        return seg(h, c.theta_lo, c.theta_hi);
    };
    if (gz > c.g_lo && gz < c.g_hi) return seg(inner, c.g_lo, gz) + seg(inner, gz, c.g_hi);
    return seg(inner, c.g_lo, c.g_hi);
}

double surrogate_correction(const ZeroCloud& cloud, double gz, double tz) {
    double s = 0;
    for (const auto& z : cloud.zeros) {
        double l = log_pseudo_hyperbolic(gz, tz, z.g, z.theta);
        if (l == kNegInf) return kNegInf;
        s += z.mult * l;
    }
    for (const auto& c : cloud.cells) s -= cell_log_potential(c, gz, tz);
    return s;
}

double eval_log_surrogate(const ZeroCloud& cloud, const PiecewiseProfile& prof, double gz, double tz) {
    double corr = surrogate_correction(cloud, gz, tz);
    if (corr == kNegInf) return kNegInf;
    return prof.eval(gz).phi + corr;
}

namespace {

// zeros whose modulus lies within delta of r
std::pair<std::size_t, std::size_t> radial_window(const ZeroCloud& cloud, double g, double delta) {
    double t = std::exp(-g);
    double g_lo = t + delta >= 1.0 ? 0.0 : -std::log(t + delta);
    double g_hi = delta >= t ? std::numeric_limits<double>::infinity() : -std::log(t - delta);
    auto lo = std::lower_bound(cloud.zeros.begin(), cloud.zeros.end(), g_lo,
                               [](const Zero& z, double v) { return z.g < v; });
    auto hi = std::upper_bound(cloud.zeros.begin(), cloud.zeros.end(), g_hi,
                               [](double v, const Zero& z) { return v < z.g; });
    return {static_cast<std::size_t>(lo - cloud.zeros.begin()), static_cast<std::size_t>(hi - cloud.zeros.begin())};
}

}  // namespace

bool in_excluded_set(const ZeroCloud& cloud, double gz, double tz, double eps) {
    if (eps <= 0) return false;
    double delta = eps * std::exp(-gz);
    auto [i0, i1] = radial_window(cloud, gz, delta);
    double r = -std::expm1(-gz), tr = std::exp(-gz);
    for (std::size_t i = i0; i < i1; ++i) {
        const Zero& z = cloud.zeros[i];
        double p = -std::expm1(-z.g), tp = std::exp(-z.g);
        double s = std::sin(0.5 * (tz - z.theta));
        double d2 = (tp - tr) * (tp - tr) + 4.0 * r * p * s * s;
        if (d2 <= delta * delta) return true;
    }
    return false;
}

double excluded_arc(const ZeroCloud& cloud, double g, double eps) {
    if (eps <= 0) return 0.0;
    double delta = eps * std::exp(-g);
    double r = -std::expm1(-g), tr = std::exp(-g);
    auto [i0, i1] = radial_window(cloud, g, delta);
    std::vector<std::pair<double, double>> iv;
    for (std::size_t i = i0; i < i1; ++i) {
        const Zero& z = cloud.zeros[i];
        double p = -std::expm1(-z.g), tp = std::exp(-z.g);
        double d = tp - tr;
        double s2 = (delta * delta - d * d) / (4.0 * r * p);
        if (s2 <= 0) continue;
        if (s2 >= 1.0) return kTwoPi * r;
        double half = 2.0 * std::asin(std::sqrt(s2));
        double c = std::fmod(z.theta, kTwoPi);
        if (c < 0) c += kTwoPi;
        double lo = c - half, hi = c + half;
        if (lo < 0) {
            iv.emplace_back(lo + kTwoPi, kTwoPi);
            lo = 0;
        }
        if (hi > kTwoPi) {
            iv.emplace_back(0.0, hi - kTwoPi);
            hi = kTwoPi;
        }
        iv.emplace_back(lo, hi);
    }
    std::sort(iv.begin(), iv.end());
    double total = 0, cur_lo = 0, cur_hi = -1;
    for (const auto& [lo, hi] : iv) {
        if (lo > cur_hi) {
            if (cur_hi > cur_lo) total += cur_hi - cur_lo;
            cur_lo = lo;
            cur_hi = hi;
        } else {
            cur_hi = std::max(cur_hi, hi);
        }
    }
    if (cur_hi > cur_lo) total += cur_hi - cur_lo;
    return r * std::min(total, kTwoPi);
}

ApproximationStats approximation_report(const ZeroCloud& cloud, const PiecewiseProfile& prof,
                                        const std::vector<PolarSample>& samples, double eps,
                                        const std::vector<double>& circles) {
    ApproximationStats st;
    for (const auto& s : samples) {
        if (in_excluded_set(cloud, s.g, s.theta, eps)) {
            st.abs_errors.push_back(std::numeric_limits<double>::quiet_NaN());
            ++st.skipped;
            continue;
        }
        double err = std::fabs(eval_log_surrogate(cloud, prof, s.g, s.theta) - prof.eval(s.g).phi);
        st.abs_errors.push_back(err);
        st.max_abs = std::max(st.max_abs, err);
        st.max_stat = std::max(st.max_stat, err / (1.0 + std::max(std::log(s.g), 0.0)));
    }
    for (double g : circles) {
        double m = excluded_arc(cloud, g, eps);
        st.arc_measure.push_back(m);
        if (eps > 0) st.c4 = std::max(st.c4, m / eps);
    }
    return st;
}

}  // namespace dg
