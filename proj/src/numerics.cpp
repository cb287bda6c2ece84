#include "dg/numerics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <cstdint>
#include <sstream>

namespace dg {

LogGap LogGap::from_r(double r) {
    if (!(r >= 0.0 && r < 1.0)) throw std::domain_error("LogGap::from_r: r outside [0,1)");
    return LogGap(-std::log1p(-r));
}

double LogGap::r() const { return -std::expm1(-g); }
double LogGap::one_minus_r() const { return std::exp(-g); }
double LogGap::log_r() const { return log_r_of_g(g); }

LogValue LogValue::from_double(double x) {
    if (x == 0.0) return {};
    return {x > 0 ? 1 : -1, std::log(std::fabs(x))};
}

double LogValue::to_double() const {
    if (sign == 0) return 0.0;
    return sign * std::exp(logmag);
}

LogValue operator*(const LogValue& a, const LogValue& b) {
    if (a.sign == 0 || b.sign == 0) return {};
    return {a.sign * b.sign, a.logmag + b.logmag};
}

LogValue operator/(const LogValue& a, const LogValue& b) {
    if (b.sign == 0) throw std::domain_error("LogValue division by zero");
    if (a.sign == 0) return {};
    return {a.sign * b.sign, a.logmag - b.logmag};
}

LogValue operator-(const LogValue& a) { return {-a.sign, a.logmag}; }

LogValue operator+(const LogValue& a, const LogValue& b) { return lse_sum({a, b}); }
LogValue operator-(const LogValue& a, const LogValue& b) { return lse_sum({a, -b}); }

LogValue lv_pow(const LogValue& a, double p) {
    if (a.sign <= 0) throw std::domain_error("lv_pow needs a positive base");
    return {1, a.logmag * p};
}

namespace {

double pairwise(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise(x, h) + pairwise(x + h, n - h);
}

}  // namespace

LseResult lse_sum_checked(std::vector<LogValue> terms) {
    double mx = kNegInf;
    for (const auto& t : terms)
        if (t.sign != 0) mx = std::max(mx, t.logmag);
    if (mx == kNegInf) return {};
    if (!std::isfinite(mx)) throw std::domain_error("lse_sum: infinite term");
    std::vector<double> scaled;
    scaled.reserve(terms.size());
    for (const auto& t : terms)
        if (t.sign != 0) scaled.push_back(t.sign * std::exp(t.logmag - mx));
    double s = pairwise(scaled.data(), scaled.size());
    LseResult out;
    out.cancellation = std::fabs(s) < 1e-12;
    if (s == 0.0) return out;
    out.value = {s > 0 ? 1 : -1, mx + std::log(std::fabs(s))};
    return out;
}

LogValue lse_sum(std::vector<LogValue> terms) { return lse_sum_checked(std::move(terms)).value; }

void LseAccumulator::add(double l) { add_scaled(l, 1.0); }

void LseAccumulator::add_scaled(double l, double w) {
    if (l == kNegInf || w == 0.0) return;
    if (l > max_) {
        sum_ = sum_ * std::exp(max_ - l) + w;
        max_ = l;
    } else {
        sum_ += w * std::exp(l - max_);
    }
}

double LseAccumulator::log_sum() const {
    if (max_ == kNegInf) return kNegInf;
    return max_ + std::log(sum_);
}

double log_r_of_g(double g) { return std::log1p(-std::exp(-g)); }

double loglog_inv_r(double g) {
    if (g > 30.0) {
        // -log(1-x) = x (1 + x/2 + x^2/3 + ...), x = e^{-g}
        double x = std::exp(-g);
        return -g + std::log1p(x * (0.5 + x / 3.0));
    }
    return std::log(-std::log1p(-std::exp(-g)));
}

double r_diff(double ga, double gb) { return std::exp(-ga) * -std::expm1(ga - gb); }

double log_r_diff(double ga, double gb) { return -ga + std::log(-std::expm1(ga - gb)); }

double log_ratio(double ga, double gb) {
    double ra = -std::expm1(-ga);
    return std::log1p(r_diff(ga, gb) / ra);
}

double log_log_ratio(double ga, double gb) {
    // x = (r_b - r_a)/r_a kept as a log so it never underflows
    double lx = log_r_diff(ga, gb) - log_r_of_g(ga);
    if (lx < -30.0) return lx + std::log1p(-0.5 * std::exp(lx));
    double x = std::exp(lx);
    return std::log(std::log1p(x));
}

double log_expm1(double x) {
    if (x > 40.0) return x + std::log1p(-std::exp(-x));
    return std::log(std::expm1(x));
}

double log1mexp(double x) {
    if (x < 0.6931471805599453) return std::log(-std::expm1(-x));
    return std::log1p(-std::exp(-x));
}

BracketError::BracketError(double lo_, double hi_, double flo, double fhi)
    : std::runtime_error([&] {
          std::ostringstream os;
          os.precision(17);
          os << "no sign change on [" << lo_ << ", " << hi_ << "]: f(lo)=" << flo << " f(hi)=" << fhi;
          return os.str();
      }()),
      lo(lo_), hi(hi_), f_lo(flo), f_hi(fhi) {}

double find_root(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (!(flo * fhi < 0.0)) throw BracketError(lo, hi, flo, fhi);
    int bits = std::max(8, std::min(52, static_cast<int>(std::ceil(-std::log2(rel_tol)))));
    boost::math::tools::eps_tolerance<double> tol(bits);
    std::uintmax_t it = 200;
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, it);
    // finish with plain bisection so the width criterion is met even when
    // toms748 stalls on a flat function
    double fa = f(a);
    for (int i = 0; i < 200 && std::fabs(b - a) > rel_tol * std::max(std::fabs(a), std::fabs(b)); ++i) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

QuadratureError::QuadratureError(double est, double prev)
    : std::runtime_error([&] {
          std::ostringstream os;
          os.precision(17);
          os << "quadrature did not converge: last estimates " << est << ", " << prev;
          return os.str();
      }()),
      estimate(est), previous(prev) {}

namespace {

double gk_checked(const std::function<double(double)>& h, double lo, double hi, const QuadOptions& opt) {
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0, l1 = 0.0;
    double res = gauss_kronrod<double, 15>::integrate(h, lo, hi, opt.max_depth, opt.rel_tol, &err, &l1);
    double bound = 10.0 * opt.rel_tol * std::max({std::fabs(res), 1e-8 * l1, 1e-300});
    if (!std::isfinite(res) || err > bound) {
        // boost's estimate is pessimistic near roundoff; accept if a shallower pass agrees
        double prev = gauss_kronrod<double, 15>::integrate(h, lo, hi, opt.max_depth / 2, opt.rel_tol);
        if (!std::isfinite(res) || std::fabs(res - prev) > opt.rel_tol * std::fabs(res)) throw QuadratureError(res, prev);
    }
    return res;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, const QuadOptions& opt) {
    if (a == b) return 0.0;
    if (opt.hint == Singularity::upper_power) {
        return integrate_upper_singular(
            [&f, b](double t, double) { return f(std::min(t, std::nextafter(b, -std::numeric_limits<double>::infinity()))); },
            a, b, opt);
    }
    return gk_checked(f, a, b, opt);
}

double integrate_upper_singular(const std::function<double(double, double)>& f, double a, double b,
                                const QuadOptions& opt) {
    if (a == b) return 0.0;
    // tanh-sinh clusters at both ends and hands over the complement, so f sees b - t exactly
    boost::math::quadrature::tanh_sinh<double> ts(opt.max_depth);
    double err = 0.0, l1 = 0.0;
    double res = ts.integrate(
        [&f, a, b](double t, double tc) {
            double d = tc > 0 ? tc : b - t;
            if (d <= 0.0) return 0.0;
            return f(t, d);
        },
        a, b, opt.rel_tol, &err, &l1);
    if (!std::isfinite(res) || err > 10.0 * opt.rel_tol * std::max({std::fabs(res), 1e-8 * l1, 1e-300}))
        throw QuadratureError(res, res - err);
    return res;
}

double log_integrate_exp(const std::function<double(double)>& hfun, double a, double b, double max_panel) {
    using boost::math::quadrature::gauss;
    if (!(b > a)) return kNegInf;
    int panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_panel)));
    double w = (b - a) / panels;
    LseAccumulator acc;
    const auto& x = gauss<double, 10>::abscissa();
    const auto& wt = gauss<double, 10>::weights();
    std::vector<double> vals;
    for (int p = 0; p < panels; ++p) {
        double c = a + (p + 0.5) * w, hw = 0.5 * w;
        vals.clear();
        double mx = kNegInf;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double v1 = hfun(c + hw * x[i]);
            vals.push_back(v1);
            mx = std::max(mx, v1);
            if (x[i] != 0.0) {
                double v2 = hfun(c - hw * x[i]);
                vals.push_back(v2);
                mx = std::max(mx, v2);
            }
        }
        if (mx == kNegInf) continue;
        double s = 0.0;
        std::size_t k = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            s += wt[i] * std::exp(vals[k++] - mx);
            if (x[i] != 0.0) s += wt[i] * std::exp(vals[k++] - mx);
        }
        if (s > 0) acc.add(mx + std::log(s * hw));
    }
    return acc.log_sum();
}

}  // namespace dg
