#include "dg/ode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dg {

namespace {

constexpr double kPi = std::numbers::pi;

// signed sum of log-magnitude terms
struct SignedAcc {
    LseAccumulator pos, neg;
    void add(const LogValue& v) {
        if (v.sign > 0) pos.add(v.logmag);
        else if (v.sign < 0) neg.add(v.logmag);
    }
    LogValue value() const {
        return LogValue::from_log(pos.log_sum()) - LogValue::from_log(neg.log_sum());
    }
};

double log_fact_ratio(int m, int k) {  // log(m!/(m+k)!)
    double s = 0;
    for (int i = 1; i <= k; ++i) s -= std::log(static_cast<double>(m + i));
    return s;
}

}  // namespace

CoeffSpec CoeffSpec::from_power(double c, int q, int degree) {
    if (q < 0 || c == 0) throw std::invalid_argument("from_power: need c != 0 and q >= 0");
    CoeffSpec s;
    s.power = PowerForm{c, q};
    // A_j = c binom(j + q - 1, j)
    s.dense.reserve(degree + 1);
    double lb = 0;
    for (int j = 0; j <= degree; ++j) {
        if (j > 0) lb += std::log(static_cast<double>(j + q - 1)) - std::log(static_cast<double>(j));
        if (q == 0 && j > 0) s.dense.push_back(LogValue::zero());
        else s.dense.push_back(LogValue::from_double(c) * LogValue::from_log(lb));
    }
    double lc = std::log(std::fabs(c));
    s.log_M = [lc, q](double g) { return lc + q * g; };
    s.pure_power = std::make_pair(lc, static_cast<double>(q));
    s.p1 = s.p2 = q;
    return s;
}

CoeffSpec CoeffSpec::from_dense(std::vector<double> a) {
    CoeffSpec s;
    for (double x : a) s.dense.push_back(LogValue::from_double(x));
    return s;
}

CoeffSpec CoeffSpec::majorant(std::function<double(double)> log_M, double p1, double p2) {
    CoeffSpec s;
    s.log_M = std::move(log_M);
    s.p1 = p1;
    s.p2 = p2;
    return s;
}

CoeffSpec CoeffSpec::majorant_power(double log_C, double q) {
    CoeffSpec s;
    s.log_M = [log_C, q](double g) { return log_C + q * g; };
    s.pure_power = std::make_pair(log_C, q);
    s.p1 = s.p2 = q;
    return s;
}

LogValue SolutionSeries::coeff(int m) const {
    if (m < static_cast<int>(init.size())) return LogValue::from_double(init[m]);
    LogValue v = c.at(m);
    v.logmag -= m * log_rho;
    return v;
}

bool SolutionSeries::positive() const {
    return std::all_of(c.begin(), c.end(), [](const LogValue& v) { return v.sign >= 0; });
}

double SolutionSeries::log_abs(double g, double theta) const {
    double step = log_r_of_g(g) - log_rho;
    if (theta == 0) {
        SignedAcc acc;
        for (std::size_t m = 0; m < c.size(); ++m)
            if (c[m].sign != 0) acc.add(LogValue(c[m].sign, c[m].logmag + m * step));
        return acc.value().logmag;
    }
    double top = kNegInf;
    for (std::size_t m = 0; m < c.size(); ++m)
        if (c[m].sign != 0) top = std::max(top, c[m].logmag + m * step);
    if (top == kNegInf) return kNegInf;
    std::complex<double> s = 0;
    for (std::size_t m = 0; m < c.size(); ++m)
        if (c[m].sign != 0)
            s += std::polar(c[m].sign * std::exp(c[m].logmag + m * step - top), theta * static_cast<double>(m));
    return top + std::log(std::abs(s));
}

double SolutionSeries::log_max_modulus(double g, int n_theta) const {
    if (positive()) return log_abs(g, 0.0);
    double best = kNegInf;
    for (int i = 0; i < n_theta; ++i) best = std::max(best, log_abs(g, 2 * kPi * i / n_theta));
    return best;
}

double SolutionSeries::tail_gauge(double g) const {
    double step = log_r_of_g(g) - log_rho;
    double top = kNegInf, last = kNegInf;
    for (std::size_t m = 0; m < c.size(); ++m) {
        if (c[m].sign == 0) continue;
        double v = c[m].logmag + m * step;
        top = std::max(top, v);
        last = v;
    }
    return last - top;
}

namespace {

SolutionSeries taylor_solve_impl(const CoeffSpec& A, int k, const std::vector<double>& init, int degree, double rho) {
    if (!A.is_dense()) throw std::invalid_argument("taylor_solve: coefficient spec has no Taylor data");
    if (k < 1) throw std::invalid_argument("taylor_solve: need k >= 1");
    if (static_cast<int>(init.size()) != k) throw std::invalid_argument("taylor_solve: need k initial values");
    if (degree < k) throw std::invalid_argument("taylor_solve: need degree >= k");
    if (!(rho > 0)) throw std::invalid_argument("taylor_solve: need rho > 0");

    SolutionSeries s;
    s.k = k;
    s.log_rho = std::log(rho);
    s.init = init;
    s.c.assign(degree + 1, LogValue::zero());
    for (int m = 0; m < k; ++m) {
        s.c[m] = LogValue::from_double(init[m]);
        s.c[m].logmag += m * s.log_rho;
    }
    const double lrk = k * s.log_rho;
    auto check = [&](const LogValue& v, int m) {
        if (std::isnan(v.logmag) || v.logmag == std::numeric_limits<double>::infinity())
            throw std::runtime_error("taylor_solve: overflow at degree " + std::to_string(m) +
                                     " despite scaling; choose a smaller rho");
    };

    if (A.power) {
        // (1-z)^{-1} acts as a running sum: S_m = rho S_{m-1} + c_m, applied q times
        const int q = A.power->q;
        const LogValue cA = LogValue::from_double(A.power->c);
        std::vector<LogValue> S(q + 1, LogValue::zero());
        LogValue lr = LogValue::from_log(s.log_rho);
        for (int m = 0; m + k <= degree; ++m) {
            S[0] = s.c[m];
            for (int l = 1; l <= q; ++l) S[l] = lr * S[l] + S[l - 1];
            LogValue v = -(cA * S[q]);
            v.logmag += log_fact_ratio(m, k) + lrk;
            check(v, m + k);
            s.c[m + k] = v;
        }
        return s;
    }

    std::vector<LogValue> a(A.dense.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        a[j] = A.dense[j];
        a[j].logmag += j * s.log_rho;
    }
    for (int m = 0; m + k <= degree; ++m) {
        SignedAcc acc;
        for (int j = 0; j <= m && j < static_cast<int>(a.size()); ++j) acc.add(a[j] * s.c[m - j]);
        LogValue v = -acc.value();
        v.logmag += log_fact_ratio(m, k) + lrk;
        check(v, m + k);
        s.c[m + k] = v;
    }
    return s;
}

}  // namespace

SolutionSeries taylor_solve(const CoeffSpec& A, int k, const std::vector<double>& init, int degree, double rho) {
    try {
        return taylor_solve_impl(A, k, init, degree, rho);
    } catch (const std::domain_error&) {  // infinite log magnitude inside a sum
        throw std::runtime_error("taylor_solve: overflow despite scaling; choose a smaller rho");
    }
}

LogValue growth_majorant(const CoeffSpec& A, int k, LogGap g) {
    if (k < 1) throw std::invalid_argument("growth_majorant: need k >= 1");
    if (!A.log_M) throw std::invalid_argument("growth_majorant: coefficient spec has no majorant");
    if (g.g <= 0) return LogValue::zero();
    double lk = std::log(static_cast<double>(k));
    if (A.pure_power) {
        // k C^{1/k} int_0^r (1-t)^{-e} dt, e = q/k
        auto [log_C, q] = *A.pure_power;
        double e = q / k, x = (e - 1) * g.g;
        double l;
        if (e == 1) l = std::log(g.g);
        else if (x > 0) l = log_expm1(x) - std::log(e - 1);
        else l = std::log(-std::expm1(x)) - std::log(1 - e);
        return LogValue::from_log(lk + log_C / k + l);
    }
    auto h = [&](double u) { return A.log_M(u) / k - u; };
    return LogValue::from_log(lk + log_integrate_exp(h, 0.0, g.g));
}

PredictedOrders predict_orders(double p1, double p2, int k, double p) {
    if (k < 1) throw std::invalid_argument("predict_orders: need k >= 1");
    if (!(k <= p1 && p1 <= p2 && p2 <= p)) throw std::invalid_argument("predict_orders: need k <= p1 <= p2 <= p");
    if (!(p2 > 2 * k)) throw std::invalid_argument("predict_orders: need p2 > 2k");
    PredictedOrders o;
    o.sigma = p2 / k - 1;
    o.alpha = std::clamp(p1 / k - (p1 / p) * (p2 / k - 1), p1 / p2, 1.0);
    o.lambda = p1 / k - o.alpha;
    return o;
}

XiBeta xi_beta(int k, double p1, double p2, double eps) {
    if (k < 1 || !(p2 > 2 * k)) throw std::invalid_argument("xi_beta: need p2 > 2k >= 2");
    if (!(p1 > 0 && p1 <= p2)) throw std::invalid_argument("xi_beta: need 0 < p1 <= p2");
    double bound = (p2 - p1) * (p2 - k) / p1;
    if (!(eps >= 0) || (eps > 0 && !(eps < bound)))
        throw std::invalid_argument("xi_beta: need 0 <= eps < (p2-p1)(p2-k)/p1");
    XiBeta r;
    r.xi = (k + std::sqrt(static_cast<double>(k) * k + 4 * p1 * (p2 + eps - k))) / 2;
    double a = r.xi + eps;
    r.beta = a * (a - k) / (p2 + eps - k);
    double lhs = (a / k - 1) / r.beta, rhs = ((p2 + eps) / k - 1) / a;
    r.identity_residual = std::fabs(lhs - rhs);
    return r;
}

TmonResult tmon_check(const TmonSpec& f, int k, int j, double r_inner, double r, double R) {
    if (!(k > j && j >= 0)) throw std::invalid_argument("tmon_check: need k > j >= 0");
    if (!(0 <= r_inner && r_inner < r && r < R)) throw std::invalid_argument("tmon_check: need 0 <= r' < r < R");
    QuadOptions qo;
    qo.rel_tol = 1e-8;
    TmonResult res;
    auto ring = [&](double rho) {
        auto g = [&](double th) { return std::exp(f.log_abs_ratio(std::polar(rho, th)) / (k - j)); };
        return rho * (integrate(g, -kPi, 0.0, qo) + integrate(g, 0.0, kPi, qo));
    };
    res.lhs = integrate(ring, r_inner, r, qo);
    if (f.log_abs_f) {
        auto lp = [&](double th) { return std::max(f.log_abs_f(std::polar(R, th)), 0.0); };
        res.T = (integrate(lp, -kPi, 0.0, qo) + integrate(lp, 0.0, kPi, qo)) / (2 * kPi);
    }
    res.rhs = R * std::log(std::numbers::e * (R - r_inner) / (R - r)) *
              (1 + std::max(std::log(1 / (R - r)), 0.0) + res.T);
    res.ratio = res.lhs / res.rhs;
    return res;
}

std::vector<PmppvkPoint> pmppvk_check(double C, double q, const std::vector<double>& g_grid) {
    if (!(C > 0 && q > 1)) throw std::invalid_argument("pmppvk_check: need C > 0, q > 1");
    std::vector<PmppvkPoint> out;
    for (double g : g_grid) {
        double x = std::log(C) - q * g;  // log(1 - rho)
        if (!(x < 0)) throw std::invalid_argument("pmppvk_check: C (1-r)^q >= 1 at g = " + std::to_string(g));
        double lr = std::log1p(-std::exp(x)) - log_r_of_g(g);  // log(rho/r)
        PmppvkPoint p;
        p.g = g;
        p.value = std::exp(std::exp(g) * lr);
        p.deviation = std::fabs(p.value - std::numbers::e);
        out.push_back(p);
    }
    return out;
}

std::pair<double, double> h_alpha_orders(double alpha, double kappa1, double kappa2) {
    if (!(0 < kappa1 && kappa1 < kappa2 && kappa2 < 1)) throw std::invalid_argument("h_alpha_orders: need 0 < k1 < k2 < 1");
    if (!(alpha > 0)) throw std::invalid_argument("h_alpha_orders: need alpha > 0");
    if (alpha == 1) throw std::invalid_argument("h_alpha_orders: alpha = 1 is not covered");
    if (alpha < kappa1) return {0.0, 0.0};
    double sigma = alpha - kappa1;
    double lambda = alpha < 1 ? alpha * (alpha - kappa1) * (1 - kappa2) / (alpha * (1 - kappa2) + kappa2 - kappa1)
                              : alpha - kappa2;
    return {sigma, lambda};
}

namespace {

struct TailStats {
    double sup = -1e300, inf = 1e300, slope_max = -1e300, slope_min = 1e300, lo = 0, hi = 0;
};

TailStats tail_stats(std::vector<std::pair<double, double>> s, const EstimateOptions& opt, const char* what) {
    std::sort(s.begin(), s.end());
    if (static_cast<int>(s.size()) < opt.min_samples)
        throw std::invalid_argument(std::string("estimate_orders: fewer than ") + std::to_string(opt.min_samples) +
                                    " " + what + " samples");
    double span = s.back().first - s.front().first;
    if (!(span >= opt.min_span))
        throw std::invalid_argument(std::string("estimate_orders: ") + what + " samples span " +
                                    std::to_string(span) + " < " + std::to_string(opt.min_span) + " in g");
    TailStats t;
    t.hi = s.back().first;
    t.lo = t.hi - opt.tail_fraction * span;
    auto first = std::find_if(s.begin(), s.end(), [&](const auto& p) { return p.first >= t.lo && p.first > 0; });
    if (first == s.end()) throw std::invalid_argument("estimate_orders: empty tail window");
    t.lo = first->first;
    double min_gap = 0.25 * (t.hi - t.lo);
    for (auto it = first; it != s.end(); ++it) {
        double ratio = it->second / it->first;
        t.sup = std::max(t.sup, ratio);
        t.inf = std::min(t.inf, ratio);
        if (it->first - first->first >= min_gap && it->first > first->first) {
            double sl = (it->second - first->second) / (it->first - first->first);
            t.slope_max = std::max(t.slope_max, sl);
            t.slope_min = std::min(t.slope_min, sl);
        }
    }
    return t;
}

}  // namespace

GrowthIndicators estimate_orders(const std::vector<std::pair<double, double>>& log_logM,
                                 const std::vector<std::pair<double, double>>& log_K, const EstimateOptions& opt) {
    if (!(opt.tail_fraction > 0 && opt.tail_fraction <= 1))
        throw std::invalid_argument("estimate_orders: tail_fraction must lie in (0, 1]");
    GrowthIndicators gi;
    auto t = tail_stats(log_logM, opt, "log log M");
    gi.sigma = t.sup;
    gi.lambda = t.inf;
    gi.sigma_slope = t.slope_max;
    gi.lambda_slope = t.slope_min;
    gi.window_lo = t.lo;
    gi.window_hi = t.hi;
    if (!log_K.empty()) {
        auto tk = tail_stats(log_K, opt, "log K");
        gi.has_K = true;
        gi.sigma_star = tk.sup;
        gi.lambda_star = tk.inf;
    }
    return gi;
}

InequalityCheck thm13a_check(double p1, int k, double lambda, double sigma) {
    double lift = sigma > 0 ? std::max(lambda - lambda / sigma, 0.0) : 0.0;
    InequalityCheck c;
    c.margin = 1 + lift - (p1 / k - 1);
    c.pass = c.margin >= 0;
    return c;
}

InequalityCheck cor14_check(double p1, double p2, int k, double lambda, double tol) {
    if (!(p2 > 2 * k)) throw std::invalid_argument("cor14_check: need p2 > 2k");
    double lo = (p1 - 2 * k) / (p2 - 2 * k) * (p2 / k - 1);
    double hi = p1 / p2 * (p2 / k - 1);
    InequalityCheck c;
    c.margin = std::min(lambda - (lo - tol), (hi + tol) - lambda);
    c.pass = c.margin >= 0;
    return c;
}

}  // namespace dg
