#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dg/numerics.hpp"
#include "dg/riesz.hpp"

namespace dg {

// Disjoint increasing intervals [g_lo, g_hi] in log-gap form; g_hi may be +inf.
struct RadialWindowSet {
    std::vector<std::pair<double, double>> intervals;
    void normalize();  // sort, drop empty intervals, merge touching ones
};

// log+ M(t) as a function of g(t), with declared orders.
struct LogMModel {
    std::function<double(double)> log_plus_M;
    double lambda = 0, sigma = 0;
};

// (1-R)^{-1/alpha} (int_0^R log+M(t) (R-t)^{1/alpha-1} dt + log+M(R0)), as a log.
LogValue i_alpha(const LogMModel& model, double alpha, LogGap R, LogGap R0);

// Windows [g*, g_n] with g* = g_n (lambda + eta/2)/(lambda + eta).
RadialWindowSet loworder_windows(double lambda, double eta, const std::vector<double>& g_n);

struct DensityResult {
    double value = 0;
    int resolved = 0;      // left endpoints whose ratio is insensitive to truncation
    bool flagged = false;  // intervals do not accumulate at 1: read as a finite union
};

// Upper density of the set; the list is read as the head of a family accumulating at 1.
DensityResult upper_density(RadialWindowSet set);

// Euclidean distance between points given as (g, theta).
double disc_distance(double g1, double t1, double g2, double t2);

struct ZeroCount {
    int n = 0;     // multiplicity in the closed disc
    double N = 0;  // int_0^h n(t)/t dt
};
ZeroCount zero_counts(const ZeroCloud& cloud, double g_zeta, double t_zeta, double h);

// int_0^{2pi} N(R e^{i th}, (1-R)/16) / |R e^{i th} - z|^2 d th
double j_integral(const ZeroCloud& cloud, double gz, double tz, LogGap R, double rel_tol = 1e-8);

// max over phi of the multiplicity in {r <= |a| <= (1+r)/2, |arg a - phi| <= (pi/4)(1-r)}
int sector_crowding(const ZeroCloud& cloud, LogGap g);

// Either a closed form for log|f^(k)/f^(j)| at (g, theta), or (k = 1, j = 0 only)
// zeros plus the logarithmic derivative of a zero-free factor.
struct LogDerivSpec {
    std::function<double(double, double)> log_abs_ratio;
    const ZeroCloud* cloud = nullptr;
    std::function<std::complex<double>(double, double)> smooth_logderiv;
    double lambda = 0, sigma = 0;
};

struct WindowReport {
    double g_lo = 0, g_hi = 0;
    double max_statistic = 0;
    int samples = 0, excluded = 0;
    double excluded_measure = 0;  // largest excluded arc over sampled circles, radians
};

struct CertificateReport {
    std::vector<WindowReport> windows;
    double exponent = 0;    // 2 + (lambda - lambda/sigma)+ + eps
    double fitted_C = 0;    // max statistic over all windows
    double arc_constant = 0;  // max excluded arc / ((1-R)/(g-1)) over circles
    std::string note;
};

struct CertificateOptions {
    int n_theta = 256;
    int radii_per_window = 8;  // used when a window holds no dyadic radius
    bool dyadic = true;        // sample r = 1 - 2^-nu inside each window
};

// Exclusion radius (1-R)/(g-1) around zeros; (1-R) when g <= 2.
double exclusion_radius(double g);

CertificateReport logderiv_certificate(const LogDerivSpec& f, int k, int j, double eps,
                                       const RadialWindowSet& windows, const CertificateOptions& opt = {});

}  // namespace dg
