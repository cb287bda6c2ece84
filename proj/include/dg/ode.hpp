#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "dg/numerics.hpp"

namespace dg {

// A = c (1 - z)^{-q}
struct PowerForm {
    double c = 1;
    int q = 0;
};

struct CoeffSpec {
    std::vector<LogValue> dense;        // A_j, j = 0..; zero beyond the end
    std::optional<PowerForm> power;     // exact closed form behind `dense`
    std::function<double(double)> log_M;  // log M(t, A) as a function of g(t)
    std::optional<std::pair<double, double>> pure_power;  // M = C (1-t)^{-q} as (log C, q)
    double p1 = 0, p2 = 0;  // declared lower degree and degree

    static CoeffSpec from_power(double c, int q, int degree);
    static CoeffSpec from_dense(std::vector<double> a);
    static CoeffSpec majorant(std::function<double(double)> log_M, double p1, double p2);
    static CoeffSpec majorant_power(double log_C, double q);
    bool is_dense() const { return !dense.empty() || power.has_value(); }
};

// Coefficients c_m = f_m rho^m.
struct SolutionSeries {
    int k = 0;
    double log_rho = 0;
    std::vector<LogValue> c;
    std::vector<double> init;  // f_0 .. f_{k-1} as supplied

    int degree() const { return static_cast<int>(c.size()) - 1; }
    LogValue coeff(int m) const;  // f_m
    bool positive() const;        // every coefficient >= 0
    // log|f(r e^{i theta})| from the truncated series
    double log_abs(double g, double theta = 0) const;
    // max over n_theta equispaced angles; exact at theta = 0 for positive coefficients
    double log_max_modulus(double g, int n_theta = 64) const;
    // log(last term / largest term) at radius g: truncation gauge
    double tail_gauge(double g) const;
};

// f^(k) + A f = 0, f_{m+k} = -(m!/(m+k)!) sum_j A_j f_{m-j}
SolutionSeries taylor_solve(const CoeffSpec& A, int k, const std::vector<double>& init, int degree,
                            double rho = 1.0);

// k int_0^r M(t, A)^{1/k} dt, as a log
LogValue growth_majorant(const CoeffSpec& A, int k, LogGap g);

struct PredictedOrders {
    double sigma = 0, lambda = 0, alpha = 0;
};
PredictedOrders predict_orders(double p1, double p2, int k, double p);

struct XiBeta {
    double xi = 0, beta = 0, identity_residual = 0;
};
XiBeta xi_beta(int k, double p1, double p2, double eps);

struct TmonSpec {
    std::function<double(std::complex<double>)> log_abs_ratio;  // log|f^(k)/f^(j)|
    std::function<double(std::complex<double>)> log_abs_f;      // for T(R, f)
};
struct TmonResult {
    double lhs = 0, rhs = 0, ratio = 0, T = 0;
};
// lhs = area integral over r_inner < |z| < r; rhs = R log(e(R-r_inner)/(R-r)) (1 + log+ 1/(R-r) + T(R,f))
TmonResult tmon_check(const TmonSpec& f, int k, int j, double r_inner, double r, double R);

struct PmppvkPoint {
    double g = 0, value = 0, deviation = 0;
};
// (rho/r)^{1/(1-r)} with 1 - rho = C (1-r)^q
std::vector<PmppvkPoint> pmppvk_check(double C, double q, const std::vector<double>& g_grid);

std::pair<double, double> h_alpha_orders(double alpha, double kappa1, double kappa2);

struct GrowthIndicators {
    double sigma = 0, lambda = 0;              // tail sup/inf of log log M / g
    double sigma_slope = 0, lambda_slope = 0;  // secant slopes in the tail window
    bool has_K = false;
    double sigma_star = 0, lambda_star = 0;    // tail sup/inf of log K / g
    double window_lo = 0, window_hi = 0;
};

struct EstimateOptions {
    double tail_fraction = 0.5;
    int min_samples = 32;
    double min_span = 6.0;
};

GrowthIndicators estimate_orders(const std::vector<std::pair<double, double>>& log_logM,
                                 const std::vector<std::pair<double, double>>& log_K = {},
                                 const EstimateOptions& opt = {});

struct InequalityCheck {
    bool pass = false;
    double margin = 0;
};
// p1/k - 1 <= 1 + (lambda - lambda/sigma)+
InequalityCheck thm13a_check(double p1, int k, double lambda, double sigma);
// (p1-2k)/(p2-2k)(p2/k-1) - tol <= lambda <= p1/p2 (p2/k-1) + tol
InequalityCheck cor14_check(double p1, double p2, int k, double lambda, double tol);

}  // namespace dg
