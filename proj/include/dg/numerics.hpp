#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dg {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Radius r in [0,1) carried as g = log(1/(1-r)).
struct LogGap {
    double g = 0.0;

    LogGap() = default;
    explicit LogGap(double g_) : g(g_) {}

    static LogGap from_r(double r);
    double r() const;            // 1 - e^{-g}; loses 1-r once g > ~36
    double one_minus_r() const;  // e^{-g}
    double log_r() const;        // log(1 - e^{-g})
};

// Signed number stored as sign * exp(logmag).
struct LogValue {
    int sign = 0;
    double logmag = kNegInf;

    LogValue() = default;
    LogValue(int s, double lm) : sign(s), logmag(s == 0 ? kNegInf : lm) {}

    static LogValue zero() { return {}; }
    static LogValue from_log(double lm) { return {1, lm}; }
    static LogValue from_double(double x);

    bool is_zero() const { return sign == 0; }
    double to_double() const;  // may overflow to inf by request
};

LogValue operator*(const LogValue& a, const LogValue& b);
LogValue operator/(const LogValue& a, const LogValue& b);
LogValue operator-(const LogValue& a);
LogValue operator+(const LogValue& a, const LogValue& b);
LogValue operator-(const LogValue& a, const LogValue& b);
LogValue lv_pow(const LogValue& a, double p);  // requires a > 0

struct LseResult {
    LogValue value;
    bool cancellation = false;  // |sum| < 1e-12 * max|term|
};

LseResult lse_sum_checked(std::vector<LogValue> terms);
LogValue lse_sum(std::vector<LogValue> terms);

// Streaming accumulator for positive log-terms; keeps a running max.
class LseAccumulator {
public:
    void add(double logterm);
    void add_scaled(double logterm, double weight);  // weight >= 0
    double log_sum() const;                            // -inf when empty
    bool empty() const { return max_ == kNegInf; }
private:
    double max_ = kNegInf;
    double sum_ = 0.0;
};

// ---- log-gap helpers -------------------------------------------------------

double log_r_of_g(double g);             // log r
double loglog_inv_r(double g);           // log(-log r) = log log(1/r)
double r_diff(double ga, double gb);     // r_b - r_a
double log_r_diff(double ga, double gb); // log(r_b - r_a), gb > ga
double log_ratio(double ga, double gb);  // log(r_b / r_a)
double log_log_ratio(double ga, double gb);  // log(log(r_b / r_a)), gb > ga
double log_expm1(double x);              // log(e^x - 1), x > 0
double log1mexp(double x);               // log(1 - e^{-x}), x > 0

// ---- root finding ----------------------------------------------------------

struct BracketError : std::runtime_error {
    double lo, hi, f_lo, f_hi;
    BracketError(double lo_, double hi_, double flo, double fhi);
};

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double rel_tol = 1e-14);

// ---- quadrature ------------------------------------------------------------

struct QuadratureError : std::runtime_error {
    double estimate, previous;
    QuadratureError(double est, double prev);
};

enum class Singularity { none, upper_power };

struct QuadOptions {
    Singularity hint = Singularity::none;
    double rel_tol = 1e-10;
    unsigned max_depth = 15;
};

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadOptions& opt = {});

// Same substitution, with f(t, b - t) so the integrand never sees a rounded gap.
double integrate_upper_singular(const std::function<double(double, double)>& f, double a, double b,
                                const QuadOptions& opt = {});

// Integral of exp(h(x)) over [a,b] returned as a log; robust to h spanning
// hundreds of units. Uses fixed Gauss-Legendre panels of width <= max_panel.
double log_integrate_exp(const std::function<double(double)>& h, double a, double b,
                         double max_panel = 0.25);

}  // namespace dg
