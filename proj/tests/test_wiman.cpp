#include "doctest.h"
#include "dg/wiman.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace dg;

namespace {

double c_a(double sigma, double j) { return 1.0 - std::pow(sigma / (j + sigma + 1.0), 1.0 / (sigma + 1.0)); }

// nu(r) for variant (a) straight from c_j: k+1 where c_k <= r < c_{k+1}, n_0 = 0 below c_0
std::int64_t nu_a_oracle(double sigma, double r) {
    if (r < c_a(sigma, 0)) return 0;
    double est = sigma * std::pow(1.0 - r, -(sigma + 1.0)) - sigma - 1.0;
    auto k = static_cast<std::int64_t>(std::floor(est));
    while (k > 0 && c_a(sigma, static_cast<double>(k)) > r) --k;
    while (c_a(sigma, static_cast<double>(k + 1)) <= r) ++k;
    return k + 1;
}

}  // namespace

TEST_CASE("ExtCount") {
    auto a = ExtCount::of(12), b = ExtCount::of(7);
    CHECK(count_diff(a, b).to_double() == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(count_diff(b, a).to_double() == doctest::Approx(-5.0).epsilon(1e-15));
    auto big = ExtCount::from_log(1000.0), big2 = ExtCount::from_log(1000.0 + std::log(2.0));
    CHECK(!big.exact);
    CHECK(big < big2);
    auto d = count_diff(big2, big);
    CHECK(d.sign == 1);
    CHECK(d.logmag == doctest::Approx(1000.0).epsilon(1e-15));
    CHECK(ExtCount::from_log(std::log(1e6)).n == 1000000);
}

TEST_CASE("build_flm1 coefficients") {
    // single step
    auto s = build_flm1(std::vector<std::int64_t>{2, 5}, {0.4}, 0.3);
    CHECK(s.log_coeff(1).to_double() == doctest::Approx(0.3 + (2 - 5) * std::log(0.4)).epsilon(1e-15));
    // constant c telescopes
    double c = 0.7;
    auto t = build_flm1(std::vector<std::int64_t>{0, 3, 4, 9, 20}, {c, c, c, c}, -1.0);
    for (int k = 0; k < 5; ++k) {
        std::int64_t nk = t.term(k).n.n;
        CHECK(t.log_coeff(k).to_double() == doctest::Approx(-1.0 - nk * std::log(c)).epsilon(1e-14));
    }
    // variant (a), sigma = 1: a_{k+1} = a_0 prod_{j<=k} c_j^{-1}
    auto a = build_prop43(Prop43Variant::a, 0, 1.0);
    double acc = 0;
    for (int k = 1; k <= 5; ++k) {
        acc -= std::log(c_a(1.0, k - 1));
        CHECK(std::fabs(a.log_coeff(k).to_double() - acc) <= 1e-12 * std::max(1.0, acc));
    }
    CHECK_THROWS_AS(build_flm1(std::vector<std::int64_t>{0, 3, 2}, {0.2, 0.3}, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_flm1(std::vector<std::int64_t>{0, 1, 2}, {0.3, 0.2}, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_flm1(std::vector<std::int64_t>{0, 1}, {1.2}, 0), std::invalid_argument);
}

TEST_CASE("central index") {
    auto a1 = build_prop43(Prop43Variant::a, 0, 1.0);
    CHECK(c_a(1.0, 1) == doctest::Approx(0.42265).epsilon(1e-5));
    CHECK(central_index(a1, LogGap::from_r(0.45)).n.n == 2);
    CHECK(central_index(a1, LogGap::from_r(0.1)).n.n == 0);

    std::vector<double> c{0.2, 0.35, 0.5, 0.8, 0.9, 0.99};
    auto s = build_flm1(std::vector<std::int64_t>{1, 3, 6, 10, 40, 41, 100}, c, 0.0);
    CHECK(central_index(s, LogGap::from_r(0.1)).n.n == 1);
    for (std::size_t k = 0; k < c.size(); ++k) {
        // r = c_k exactly: the larger index
        CHECK(central_index(s, LogGap::from_r(c[k])).k == static_cast<std::int64_t>(k + 1));
        CHECK(central_index(s, LogGap(std::nextafter(LogGap::from_r(c[k]).g, 0.0))).k == static_cast<std::int64_t>(k));
    }
}

TEST_CASE("central index matches the closed form on random radii") {
    std::mt19937_64 rng(42);
    for (double sigma : {1.0, 1.5, 3.0}) {
        auto a = build_prop43(Prop43Variant::a, 0, sigma);
        std::uniform_real_distribution<double> R(0.0, 0.9995);
        int mismatches = 0;
        for (int i = 0; i < 1000; ++i) {
            double r = R(rng);
            std::int64_t got = central_index(a, LogGap::from_r(r)).n.n, want = nu_a_oracle(sigma, r);
            // r within a few ulps of c_j may land on either side
            bool on_break = std::llabs(got - want) == 1 &&
                            std::fabs(r - c_a(sigma, static_cast<double>(std::min(got, want)))) <= 4e-16;
            if (got != want && !on_break) ++mismatches;
        }
        CHECK(mismatches == 0);
    }
    // variant (b): closed form nu = n_{k+1} on [c_k, c_{k+1}), in g
    double d = default_delta(1.0, 2.0);
    auto b = build_prop43(Prop43Variant::b, 1.0, 2.0, d, 20);
    std::uniform_real_distribution<double> G(0.01, prop43b_g(1.0, 2.0, d, 18));
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        double g = G(rng);
        std::int64_t k = -1;
        while (k + 1 < 19 && prop43b_g(1.0, 2.0, d, static_cast<int>(k + 1)) <= g) ++k;
        if (!(central_index(b, LogGap(g)).n == b.term(k + 1).n)) ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("general series: argmax with ties to the larger index") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-3, 3), R(0.01, 0.99);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<std::int64_t, double>> p{{0, U(rng)}};
        for (int j = 0; j < 12; ++j) p.push_back({p.back().first + 1 + static_cast<int>(U(rng) + 3), U(rng)});
        auto s = SparseSeries::from_coefficients(p);
        for (int i = 0; i < 20; ++i) {
            double r = R(rng);
            std::size_t best = 0;
            double bv = -1e300;
            for (std::size_t k = 0; k < p.size(); ++k) {
                double v = p[k].second + p[k].first * std::log(r);
                if (v >= bv) bv = v, best = k;
            }
            auto ci = central_index(s, LogGap::from_r(r));
            CHECK(ci.n.n == p[best].first);
            CHECK(log_max_term(s, LogGap::from_r(r)).to_double() == doctest::Approx(bv).epsilon(1e-12));
        }
    }
}

TEST_CASE("log mu: two-star identity, monotone, slope nu") {
    std::vector<SparseSeries> ss;
    ss.push_back(build_prop43(Prop43Variant::a, 0, 1.0));
    ss.push_back(build_prop43(Prop43Variant::b, 1.0, 2.0));
    ss.push_back(build_flm1(std::vector<std::int64_t>{0, 2, 7, 8, 30}, {0.1, 0.3, 0.31, 0.9}, 0.5));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> G(0.01, 6.0);
    for (const auto& s : ss) {
        for (int i = 0; i < 100; ++i) {
            double a = G(rng), b = G(rng);
            if (a == b) continue;
            CHECK(twostars_residual(s, LogGap(std::min(a, b)), LogGap(std::max(a, b))) <= 1e-10);
        }
        double prev = -1e300;
        for (double g = 0.05; g < 6.0; g += 0.05) {
            double v = log_max_term(s, LogGap(g)).to_double();
            CHECK(v >= prev);
            prev = v;
        }
    }
    // huge scales: relative residual
    const auto& b = ss[1];
    CHECK(twostars_residual(b, LogGap(100.0), LogGap(5000.0)) <= 1e-10);
    CHECK(twostars_residual(b, LogGap(1.0), LogGap(20000.0)) <= 1e-10);
    // slope in log r equals nu away from breakpoints
    const auto& f = ss[2];
    for (double r : {0.05, 0.2, 0.305, 0.5, 0.95}) {
        double h = 1e-6;
        double up = log_max_term(f, LogGap::from_r(r + h)).to_double();
        double dn = log_max_term(f, LogGap::from_r(r - h)).to_double();
        double slope = (up - dn) / (std::log(r + h) - std::log(r - h));
        CHECK(slope == doctest::Approx(static_cast<double>(central_index(f, LogGap::from_r(r)).n.n)).epsilon(1e-6));
    }
}

TEST_CASE("K indicator") {
    auto s = SparseSeries::from_coefficients({{0, 0.0}, {2, 0.0}});  // 1 + z^2
    CHECK(k_indicator(s, LogGap::from_r(0.5)).to_double() == doctest::Approx(0.4).epsilon(1e-14));
    auto one = build_flm1(std::vector<std::int64_t>{7}, {}, 1.3);
    for (double g : {0.1, 2.0, 30.0}) CHECK(k_indicator(one, LogGap(g)).to_double() == doctest::Approx(7.0).epsilon(1e-15));

    // nondecreasing in r
    auto a = build_prop43(Prop43Variant::a, 0, 1.5);
    auto f = build_flm1(std::vector<std::int64_t>{0, 2, 7, 8, 30}, {0.1, 0.3, 0.31, 0.9}, 0.5);
    for (const SparseSeries* s : {&a, &f}) {
        double prev = 0;
        for (double g = 0.05; g < 5.0; g += 0.05) {
            double K = k_indicator(*s, LogGap(g)).to_double();
            CHECK(K >= prev * (1 - 1e-12));
            prev = K;
        }
    }
    // sparse series, mid-branch: |K - nu| <= nu
    std::vector<double> gc{1.0, 2.0, 3.0, 4.0};
    auto sp = build_flm1(std::vector<ExtCount>{ExtCount::of(0), ExtCount::of(10), ExtCount::of(100),
                                               ExtCount::of(1000), ExtCount::of(10000)},
                         gc, 0.0);
    for (double g : {1.5, 2.5, 3.5}) {
        double K = k_indicator(sp, LogGap(g)).to_double();
        double nu = central_index(sp, LogGap(g)).n.value();
        CHECK(std::fabs(K - nu) <= nu);
    }
}

TEST_CASE("variant (a) asymptotics") {
    auto a = build_prop43(Prop43Variant::a, 0, 1.5);
    double nu = central_index(a, LogGap(8.0)).n.value();
    double ratio = nu * std::exp(-2.5 * 8.0) / 1.5;
    CHECK(ratio >= 0.95);
    CHECK(ratio <= 1.05);
    double st = strelitz_check(a, 1, LogGap(8.0));
    CHECK(st >= 0.9);
    CHECK(st <= 1.1);
}

TEST_CASE("variant (b) construction") {
    double lam = 1, sig = 2, q = 0.5;
    double dc = critical_delta(lam, sig);
    double y = std::pow(dc, -(sig + 1));
    CHECK(std::pow(y, 1 / q) == doctest::Approx(y + 1).epsilon(1e-12));
    double d = default_delta(lam, sig);
    CHECK(d == doctest::Approx(0.9 * std::exp(-1.0)).epsilon(1e-15));
    CHECK_THROWS_AS(build_prop43(Prop43Variant::b, lam, sig, 0.5), std::invalid_argument);   // > e^{-1}
    CHECK_THROWS_AS(build_prop43(Prop43Variant::b, 1.0, 1.5, 0.9), std::invalid_argument);   // violates the count condition
    CHECK_THROWS_AS(build_prop43(Prop43Variant::b, 2.0, 1.0), std::invalid_argument);
    // (lambda + q) g_{k+1} = (sigma + 1) g_k
    for (int k = 0; k < 30; ++k) {
        double l = (lam + q) * prop43b_g(lam, sig, d, k + 1), r = (sig + 1) * prop43b_g(lam, sig, d, k);
        CHECK(l == doctest::Approx(r).epsilon(1e-14));
    }
    auto b = build_prop43(Prop43Variant::b, lam, sig);
    // n_{k+1} = [delta^{-(sigma+1)/q^k}] + 1, exact while small
    CHECK(b.term(1).n.n == static_cast<std::int64_t>(std::floor(std::pow(d, -3.0))) + 1);
    CHECK(b.term(2).n.n == static_cast<std::int64_t>(std::floor(std::pow(d, -6.0))) + 1);
    for (int k = 1; k < b.size(); ++k) CHECK(b.term(k - 1).n < b.term(k).n);

    for (int k = 5; k <= 20; ++k) {
        LogGap rk(prop43b_g(lam, sig, d, k) - std::log(2.0));  // r_k = 2 c_k - 1
        LogValue ex = k_excess(b, rk, k);
        CHECK(ex.to_double() < 1.0);  // K(r_k) < n_k + 1
        if (k >= 8 && k <= 14) {
            double ratio = k_indicator(b, rk).logmag / rk.g;
            CHECK(ratio >= 1.35);
            CHECK(ratio <= 1.65);
        }
    }
}

TEST_CASE("Strelitz ratio") {
    auto b = build_prop43(Prop43Variant::b, 1.0, 2.0);
    CHECK(strelitz_check(b, 0, LogGap(40.0)) == 1.0);
    auto one = build_flm1(std::vector<std::int64_t>{1000}, {}, 0.0);
    CHECK(strelitz_check(one, 3, LogGap(2.0)) == doctest::Approx(1000.0 * 999 * 998 / 1e9).epsilon(1e-13));
    auto one_big = build_flm1(std::vector<ExtCount>{ExtCount::from_log(200.0)}, {}, 0.0);
    CHECK(strelitz_check(one_big, 4, LogGap(2.0)) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("convex indicators") {
    ConvexSamples p;
    for (int i = 0; i < 5000; ++i) {
        double g = 5 + i * 0.01;
        p.g.push_back(g);
        p.log_h.push_back(-2 * loglog_inv_r(g));  // h = |x|^{-2}
    }
    auto c = convex_indicators(p);
    CHECK(c.alpha == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(c.beta == doctest::Approx(2.0).epsilon(1e-12));
    // log 2 / log(1/|x|) and the forward-difference bias vanish as |x| -> 0
    CHECK(std::fabs(c.alpha_prime - 3.0) <= 0.03);
    CHECK(std::fabs(c.beta_prime - 3.0) <= 0.03);

    // same from plain (x, h) input
    std::vector<double> xs, hs;
    for (int i = 0; i < 64; ++i) {
        double x = -std::pow(10.0, -0.1 * i);
        xs.push_back(x);
        hs.push_back(1.0 / (x * x));
    }
    auto c2 = convex_indicators(ConvexSamples::from_x(xs, hs));
    CHECK(c2.alpha == doctest::Approx(2.0).epsilon(1e-9));

    ConvexSamples bad = p;
    bad.log_h[2500] += 1e-3;
    CHECK_THROWS_AS(convex_indicators(bad), std::invalid_argument);
    ConvexSamples few;
    few.g = {1, 2, 3};
    few.log_h = {1, 2, 3};
    CHECK_THROWS_AS(convex_indicators(few), std::invalid_argument);

    // variant (b) log mu over the window k in [8, 14]
    double d = default_delta(1.0, 2.0);
    auto b = build_prop43(Prop43Variant::b, 1.0, 2.0);
    double g0 = prop43b_g(1.0, 2.0, d, 8), g1 = prop43b_g(1.0, 2.0, d, 14);
    std::vector<double> grid;
    for (int i = 0; i < 2000; ++i) grid.push_back(g0 * std::pow(g1 / g0, i / 1999.0));
    auto cb = convex_indicators(log_mu_samples(b, grid), 0.0);
    CHECK(std::fabs(cb.beta_prime - (cb.beta + 1)) <= 0.05);
    CHECK(std::fabs(cb.alpha_prime - 1.5) <= 0.1);
    CHECK(cb.alpha == doctest::Approx(1.0).epsilon(0.01));
    CHECK(cb.beta == doctest::Approx(2.0).epsilon(0.01));
}
