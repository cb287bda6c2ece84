#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dg/numerics.hpp"

namespace dg {

// Nonnegative count: exact below 2^62, otherwise only log n is kept.
struct ExtCount {
    std::int64_t n = 0;
    double log_n = kNegInf;
    bool exact = true;

    static ExtCount of(std::int64_t n);
    static ExtCount from_log(double log_n);  // exact when it fits
    double value() const;                    // inf when too large
    std::string str() const;
};

bool operator==(const ExtCount& a, const ExtCount& b);
bool operator<(const ExtCount& a, const ExtCount& b);
LogValue count_diff(const ExtCount& a, const ExtCount& b);  // a - b

// Term k overtakes term k-1 at radius rho_k; w = log(1/rho_k).
// Coefficients follow from log a_k - log a_{k-1} = (n_k - n_{k-1}) w_k.
struct SeriesTerm {
    ExtCount n;
    LogValue w;  // may be left unset when g_break is given
    double g_break = std::numeric_limits<double>::quiet_NaN();  // g of rho_k when known exactly
};

class SparseSeries {
public:
    using Generator = std::function<SeriesTerm(std::int64_t)>;

    // Terms with breakpoints; term 0 carries only n.
    static SparseSeries from_terms(std::vector<SeriesTerm> terms, double log_a0);
    // Plain (n, log a_n) pairs, n strictly increasing, first n = 0.
    static SparseSeries from_coefficients(const std::vector<std::pair<std::int64_t, double>>& terms);
    // Lazily generated Newton series (breakpoints increasing).
    static SparseSeries generated(std::int64_t count, Generator gen, double log_a0);

    std::int64_t size() const { return count_; }
    SeriesTerm term(std::int64_t k) const;
    double log_a0() const { return log_a0_; }
    bool newton() const { return newton_; }   // breakpoints increasing: terms unimodal in k
    LogValue log_coeff(std::int64_t k) const;  // log a_{n_k}, held in log-magnitude form
    const SparseSeries& hull() const;          // Newton envelope; *this when newton()

private:
    std::vector<SeriesTerm> terms_;
    std::vector<double> raw_log_a_;            // general series only
    std::shared_ptr<const SparseSeries> hull_;
    Generator gen_;
    std::int64_t count_ = 0;
    double log_a0_ = 0;
    bool newton_ = true;
};

struct CentralIndex {
    std::int64_t k = 0;  // term index
    ExtCount n;          // nu(r)
};

CentralIndex central_index(const SparseSeries& s, LogGap g);
// log mu(r), held in log-magnitude form (log mu itself can exceed 1e300).
LogValue log_max_term(const SparseSeries& s, LogGap g);
// |log mu(g) - log mu(g0) - int nu/t dt| / max(1, |int|).
double twostars_residual(const SparseSeries& s, LogGap g0, LogGap g);

LogValue k_indicator(const SparseSeries& s, LogGap g);
// K(r) - n_{k_ref}, resolved even when n is astronomically large.
LogValue k_excess(const SparseSeries& s, LogGap g, std::int64_t k_ref);
// f^(m)(r) r^m / (K^m f(r)).
double strelitz_check(const SparseSeries& s, int m, LogGap g);

SparseSeries build_flm1(const std::vector<ExtCount>& n_seq, const std::vector<double>& g_c, double log_a0);
SparseSeries build_flm1(const std::vector<std::int64_t>& n_seq, const std::vector<double>& c_seq, double log_a0);

enum class Prop43Variant { a, b };

// Largest delta with 1/x^{s+1} + 1 <= 1/x^{(s+1)/q} on (0, delta].
double critical_delta(double lambda, double sigma);
double default_delta(double lambda, double sigma);
// (a): n_k = k, lambda unused, terms until g(c_k) ~ 40 or 2^62.
// (b): c_k = 1 - delta^{q^-k} stored as g_k = q^-k log(1/delta), `terms` terms.
SparseSeries build_prop43(Prop43Variant v, double lambda, double sigma, std::optional<double> delta = {},
                          int terms = 40);
// g of c_k for the (b) construction.
double prop43b_g(double lambda, double sigma, double delta, int k);

// Samples of a convex h on (-inf, 0), x = log r(g), h > 0 held as log h.
// log_dh, when filled, holds log(h_{i+1} - h_i) computed without cancellation.
struct ConvexSamples {
    std::vector<double> g;
    std::vector<double> log_h;
    std::vector<double> log_dh;
    static ConvexSamples from_x(const std::vector<double>& x, const std::vector<double>& h);
};

// log mu(g) - log mu(g0) = int nu(t)/t dt, summed branch by branch; g0 < g.
LogValue log_mu_increment(const SparseSeries& s, LogGap g0, LogGap g);
// h = log mu on a g grid, with exact increments.
ConvexSamples log_mu_samples(const SparseSeries& s, const std::vector<double>& g_grid);

struct ConvexIndicators {
    double alpha = 0, beta = 0;              // tail inf/sup of log h / log(1/|x|)
    double alpha_prime = 0, beta_prime = 0;  // same for h'_+
};

ConvexIndicators convex_indicators(const ConvexSamples& s, double tail_fraction = 0.5, double tol = 1e-9);

}  // namespace dg
