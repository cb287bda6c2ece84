#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dg/numerics.hpp"

namespace dg {

struct ScaffoldParams {
    int k = 1;
    double p1 = 2.0, p2 = 3.0, p = 3.0;
    double log_C = 12.0;
    double g1 = 36.0;  // LogGap of r_1
    double a = 0.0, b = 0.0;
    std::function<double(int)> eta = [](int n) { return n + 1.0; };
    bool auto_constants = true;  // a, b, g1 follow log_C (and the retry policy may raise C)

    // C = exp(max(10, 4 p2/(p2-p1))), a = (log C)^0.45, b = min(1, (p2-p1)/10), g1 = 3 log C
    static ScaffoldParams defaults(double p1, double p2, double p, int k = 1);
    void rederive_constants();
    void validate() const;  // throws std::invalid_argument
};

struct Intermediates {
    double g_prime = 0, g_hat = 0, g_star = 0;
    double log_R = 0, log_M = 0;  // R_n, M_n are positive; logs kept
};

struct Generation {
    int n = 0;
    double g_n = 0, g_prime = 0, g_hat = 0, g_star = 0, g_dprime = 0;
    LogValue R, M;
    double eps = 0;       // eps_n
    double eps_next = 0;  // eps_{n+1} from the right closure equation
    double eps_next_left = 0;
    double g_next = 0;    // g(r_{n+1}) = g(r'') + log eta_n
    // diagnostics
    double cross_residual = 0;  // |eps_next - eps_next_left| / |eps_next + p2 - p1|
    double ratio_u = 0;         // (1 - r'') u(r^) / (1 - r^)
    double ratio_g = 0;         // (1 - r'') g(r^) / (1 - r^)
    double g_alpha = 0, g_beta = 0;
};

struct IrregularScaffold {
    ScaffoldParams params;
    std::vector<Generation> generations;
    int retries = 0;  // times C was raised by the retry policy

    double u(double g) const { return g + params.log_C; }
    double g_end() const;  // upper end of the constructed range (g of r_{N+1})
};

Intermediates derive_intermediates(double g_n, double eps_n, const ScaffoldParams& prm);

struct ClosureValues {
    double gL, gR;
};
ClosureValues closure_residuals(double g, double g_n, double eps_n, const Intermediates& im,
                                const ScaffoldParams& prm);

struct ClosureSolution {
    double g_dprime;
    double eps_next;      // right closure equation
    double eps_next_left;  // left closure equation
    double cross_residual;
    double g_alpha, g_beta;
};

struct ScaffoldError : std::runtime_error {
    std::string constant;  // "a", "b" or "C"
    ScaffoldError(const std::string& what, std::string c) : std::runtime_error(what), constant(std::move(c)) {}
};

ClosureSolution solve_closure(double g_n, double eps_n, const Intermediates& im, const ScaffoldParams& prm);

IrregularScaffold build_scaffold(ScaffoldParams prm, int N, int max_retries = 8);

// F(d) = d + (1-d) log(1-d) = sum_{k>=2} d^k/(k(k-1)), returned as log F from log d.
double log_F(double log_d);

// log of int_a^b log(r/t) dt for a < b <= r, all given as LogGap values.
double log_int_log_ratio(double ga, double gb, double gr);

}  // namespace dg
