#include "dg/scaffold.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dg {

ScaffoldParams ScaffoldParams::defaults(double p1, double p2, double p, int k) {
    ScaffoldParams s;
    s.k = k;
    s.p1 = p1;
    s.p2 = p2;
    s.p = p;
    s.log_C = std::max(10.0, 4.0 * p2 / (p2 - p1));
    s.auto_constants = true;
    s.rederive_constants();
    return s;
}

void ScaffoldParams::rederive_constants() {
    a = std::pow(log_C, 0.45);
    b = std::min(1.0, (p2 - p1) / 10.0);
    g1 = 3.0 * log_C;
}

void ScaffoldParams::validate() const {
    if (k < 1) throw std::invalid_argument("k must be a positive integer");
    if (!(p1 > 0 && p1 < p2 && p2 <= p)) throw std::invalid_argument("need 0 < p1 < p2 <= p");
    if (!(log_C > 1.0)) throw std::invalid_argument("need C > e");
    if (!(log_C > p2 / (p2 - p1))) throw std::invalid_argument("need C > e^(p2/(p2-p1))");
    if (!(a > 0 && a < std::sqrt(log_C))) throw std::invalid_argument("need 0 < a < (log C)^(1/2)");
    if (!(b > 0 && b < a)) throw std::invalid_argument("need 0 < b < a");
    if (!(g1 > 0)) throw std::invalid_argument("need r_1 in (0,1)");
}

double IrregularScaffold::g_end() const {
    if (generations.empty()) return params.g1;
    return generations.back().g_next;
}

double log_F(double log_d) {
    double d = std::exp(log_d);
    if (d < 0.5) {
        double s = 0.0, pw = 1.0;
        for (int k = 2; k < 200; ++k) {
            double t = pw / (k * (k - 1.0));
            s += t;
            if (t < 1e-18 * s) break;
            pw *= d;
        }
        return 2.0 * log_d + std::log(s);
    }
    if (d >= 1.0) return 0.0;
    return std::log(d + (1.0 - d) * std::log1p(-d));
}

double log_int_log_ratio(double ga, double gb, double gr) {
    // (b-a) log(r/b) + b F((b-a)/b)
    double l_ba = log_r_diff(ga, gb);
    double lb = log_r_of_g(gb);
    double t2 = lb + log_F(l_ba - lb);
    if (gr <= gb) return t2;
    double t1 = l_ba + log_log_ratio(gb, gr);
    double m = std::max(t1, t2);
    return m + std::log(std::exp(t1 - m) + std::exp(t2 - m));
}

Intermediates derive_intermediates(double g_n, double eps_n, const ScaffoldParams& prm) {
    if (!(std::fabs(eps_n) < 0.5 * (prm.p2 - prm.p1)))
        throw ScaffoldError("|eps_n| must be below (p2-p1)/2", "C");
    Intermediates im;
    double lc = prm.log_C;
    double u_n = g_n + lc;
    double u_prime = (prm.p2 + eps_n) / prm.p1 * u_n;  // (i)
    im.g_prime = u_prime - lc;
    im.g_hat = prm.p / prm.p2 * im.g_prime;  // (iv)
    double u_hat = im.g_hat + lc;
    im.g_star = im.g_hat - std::log1p(-1.0 / u_hat);  // (ii)
    im.log_R = std::log(prm.p2 + eps_n) + log_r_of_g(g_n) + g_n;  // (iii)
    im.log_M = std::log(prm.p2 - prm.p1) + 2.0 * im.g_hat + 2.0 * std::log(u_hat);  // (v)
    if (!(g_n < im.g_prime && im.g_prime <= im.g_hat && im.g_hat < im.g_star))
        throw ScaffoldError("ordering r_n < r' <= r^ < r* violated", "C");
    return im;
}

ClosureValues closure_residuals(double g, double g_n, double eps_n, const Intermediates& im,
                                const ScaffoldParams& prm) {
    double lc = prm.log_C;
    double u = g + lc;
    double r = -std::expm1(-g);
    double r_n = -std::expm1(-g_n);
    double l_span = log_r_diff(im.g_hat, im.g_star);  // log(r* - r^)

    // g_L = (R(1-r) + M(r*-r^)(1-r) - p1 r (1-r)/(1-r')) u / r
    double A1 = (prm.p2 + eps_n) * r_n * std::exp(g_n - g);
    double A2 = std::exp(im.log_M + l_span - g);
    double A3 = prm.p1 * r * std::exp(im.g_prime - g);
    double gL = (A1 + A2 - A3) * u / r;

    // g_R = R log(r/r_n) + M int_{r^}^{r*} log(r/t) dt - p1 (r - r')/(1 - r')
    double B1 = std::exp(im.log_R + log_log_ratio(g_n, g));
    double B2 = std::exp(im.log_M + log_int_log_ratio(im.g_hat, im.g_star, g));
    double B3 = prm.p1 * -std::expm1(im.g_prime - g);
    double gR = B1 + B2 - B3;
    return {gL, gR};
}

ClosureSolution solve_closure(double g_n, double eps_n, const Intermediates& im, const ScaffoldParams& prm) {
    double u_hat = im.g_hat + prm.log_C;
    double s_alpha = 0.5 * std::log(u_hat) - std::log(prm.a);
    double s_beta = 2.0 * std::log(u_hat) - std::log(prm.b);
    ClosureSolution out{};
    out.g_alpha = im.g_hat + s_alpha;
    out.g_beta = im.g_hat + s_beta;
    if (!(out.g_alpha > im.g_star)) throw ScaffoldError("alpha_n does not exceed r*_n; a too large", "a");
    auto h = [&](double s) {
        auto v = closure_residuals(im.g_hat + s, g_n, eps_n, im, prm);
        return v.gL - v.gR;
    };
    double h_alpha = h(s_alpha), h_beta = h(s_beta);
    if (!(h_alpha > 0)) throw ScaffoldError("g_L(alpha_n) <= g_R(alpha_n); raise a or C", "a");
    if (!(h_beta < 0)) throw ScaffoldError("g_L(beta_n) >= g_R(beta_n); lower b", "b");
    double s = find_root(h, s_alpha, s_beta, 1e-15);
    out.g_dprime = im.g_hat + s;
    auto v = closure_residuals(out.g_dprime, g_n, eps_n, im, prm);
    double u2 = out.g_dprime + prm.log_C;
    out.eps_next = v.gR / u2 - (prm.p2 - prm.p1);      // right closure equation
    out.eps_next_left = v.gL / u2 - (prm.p2 - prm.p1);  // left closure equation
    out.cross_residual = std::fabs(out.eps_next - out.eps_next_left) / std::fabs(out.eps_next + prm.p2 - prm.p1);
    return out;
}

namespace {

IrregularScaffold build_once(const ScaffoldParams& prm, int N) {
    IrregularScaffold sc;
    sc.params = prm;
    double g_n = prm.g1, eps = 0.0;
    for (int n = 1; n <= N; ++n) {
        Intermediates im = derive_intermediates(g_n, eps, prm);
        ClosureSolution cs = solve_closure(g_n, eps, im, prm);
        if (!(std::fabs(cs.eps_next) < 0.5 * (prm.p2 - prm.p1)))
            throw ScaffoldError("|eps_{n+1}| >= (p2-p1)/2; raise C", "C");
        Generation G;
        G.n = n;
        G.g_n = g_n;
        G.g_prime = im.g_prime;
        G.g_hat = im.g_hat;
        G.g_star = im.g_star;
        G.g_dprime = cs.g_dprime;
        G.R = LogValue::from_log(im.log_R);
        G.M = LogValue::from_log(im.log_M);
        G.eps = eps;
        G.eps_next = cs.eps_next;
        G.eps_next_left = cs.eps_next_left;
        G.cross_residual = cs.cross_residual;
        double eta = prm.eta(n);
        if (!(eta > 1.0)) throw std::invalid_argument("eta_n must exceed 1");
        G.g_next = cs.g_dprime + std::log(eta);  // r_{n+1} = 1 - (1 - r'')/eta_n
        G.ratio_u = std::exp(im.g_hat - cs.g_dprime) * (im.g_hat + prm.log_C);
        G.ratio_g = std::exp(im.g_hat - cs.g_dprime) * im.g_hat;
        G.g_alpha = cs.g_alpha;
        G.g_beta = cs.g_beta;
        sc.generations.push_back(G);
        g_n = G.g_next;
        eps = cs.eps_next;
    }
    return sc;
}

}  // namespace

IrregularScaffold build_scaffold(ScaffoldParams prm, int N, int max_retries) {
    if (N < 1) throw std::invalid_argument("N must be at least 1");
    prm.validate();
    for (int attempt = 0;; ++attempt) {
        try {
            IrregularScaffold sc = build_once(prm, N);
            sc.retries = attempt;
            return sc;
        } catch (const ScaffoldError& e) {
            if (!prm.auto_constants || attempt >= max_retries) throw;
            prm.log_C += std::log(10.0);
            prm.rederive_constants();
            prm.validate();
        }
    }
}

}  // namespace dg
