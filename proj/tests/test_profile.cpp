#include "doctest.h"
#include "dg/profile.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace dg;

namespace {

const IrregularScaffold& reference_scaffold() {
    static IrregularScaffold sc = build_scaffold(ScaffoldParams::defaults(2, 3, 3, 1), 4);
    return sc;
}

// Relative mismatch of S_g + S/r, S = phi'(1-r), from central differences of
// eval's phi' in g, against the scaled Laplacian. In branch 2 the two terms
// cancel, so the scale is their size. Differencing phi twice cannot resolve
// branch 2, where phi' drops to e^{-24} of phi.
double fd_laplacian_error(const PiecewiseProfile& pr, int n, int b, double g, double h) {
    double sp = pr.eval_branch(n, b, g + h).s;
    double sm = pr.eval_branch(n, b, g - h).s;
    auto v = pr.eval_branch(n, b, g);
    double d1 = (sp - sm) / (2 * h);
    double r = -std::expm1(-g);
    double fd = d1 + v.s / r;
    double scale = std::max({std::fabs(v.lap_scaled), std::fabs(d1), std::fabs(v.s / r)});
    return std::fabs(fd - v.lap_scaled) / scale;
}

// phi itself against the integral of phi' (trapezoid in g), for the value column.
double phi_increment_error(const PiecewiseProfile& pr, int n, int b, double g0, double g1) {
    int m = 2000;
    double acc = 0;
    for (int i = 0; i <= m; ++i) {
        double g = g0 + (g1 - g0) * i / m;
        double w = (i == 0 || i == m) ? 0.5 : 1.0;
        acc += w * pr.eval_branch(n, b, g).s;  // dphi/dg = S
    }
    acc *= (g1 - g0) / m;
    double d = pr.eval_branch(n, b, g1).phi - pr.eval_branch(n, b, g0).phi;
    return std::fabs(acc - d) / std::max(std::fabs(d), 1e-300);
}

}  // namespace

TEST_CASE("profile branch values") {
    PiecewiseProfile pr(reference_scaffold());
    const auto& sc = pr.scaffold();
    const auto& G1 = sc.generations[0];
    // first branch with eps_1 = 0
    for (double g : {0.5, 5.0, 20.0, 35.9}) {
        auto v = pr.eval(g);
        CHECK(v.branch == 1);
        CHECK(v.phi == doctest::Approx(3.0 * (g + sc.params.log_C)).epsilon(1e-15));
    }
    // middle branch is harmonic
    auto m = pr.eval(0.5 * (G1.g_n + G1.g_prime));
    CHECK(m.branch == 2);
    CHECK(m.laplacian.is_zero());
    CHECK(m.lap_scaled == 0.0);
    // right-continuity at junctions
    CHECK(pr.locate(G1.g_n) == std::make_pair(1, 2));
    CHECK(pr.locate(G1.g_star) == std::make_pair(1, 5));
    CHECK(pr.locate(G1.g_dprime) == std::make_pair(2, 1));
    // p = p2 leaves branch 3 empty
    auto b3 = pr.branch_range(1, 3);
    CHECK(b3.first == b3.second);
    CHECK_THROWS_AS(pr.eval(pr.g_max()), std::out_of_range);
    CHECK_THROWS_AS(pr.eval(-1.0), std::out_of_range);
    // phi' and the Laplacian in log form agree with the scaled values
    auto v = pr.eval(G1.g_hat + 0.005);
    CHECK(v.branch == 4);
    CHECK(v.phi_prime.logmag == doctest::Approx(std::log(v.s) + G1.g_hat + 0.005).epsilon(1e-14));
    CHECK(v.laplacian.logmag == doctest::Approx(std::log(v.lap_scaled) + 2 * (G1.g_hat + 0.005)).epsilon(1e-14));
}

TEST_CASE("junction continuity") {
    PiecewiseProfile pr(reference_scaffold());
    auto js = junction_report(pr);
    CHECK(js.size() == 20);
    for (const auto& j : js) {
        INFO(j.name << " gen " << j.generation);
        CHECK(j.phi_jump <= 1e-9);
        CHECK(j.dphi_jump <= 1e-9);
    }
}

TEST_CASE("perturbing eps_{n+1} breaks the r'' junction") {
    IrregularScaffold sc = reference_scaffold();
    sc.generations[1].eps_next += 1e-3;
    sc.generations[2].eps += 1e-3;
    PiecewiseProfile pr(sc);
    for (const auto& j : junction_report(pr)) {
        if (j.generation == 2 && j.name == "r''") {
            CHECK(j.phi_jump > 1e-4);
            CHECK(j.dphi_jump > 1e-4);
        }
    }
}

TEST_CASE("Laplacian against finite differences") {
    PiecewiseProfile pr(reference_scaffold());
    int N = pr.generation_count();
    std::mt19937_64 rng(11);
    for (int n = 1; n <= N + 1; ++n) {
        for (int b = 1; b <= (n <= N ? 5 : 1); ++b) {
            auto [lo, hi] = pr.branch_range(n, b);
            if (hi <= lo) continue;
            double w = hi - lo;
            double h = std::min(1e-3, 1e-3 * w);
            std::uniform_real_distribution<double> U(lo + 0.01 * w, hi - 0.01 * w);
            double worst = 0;
            for (int i = 0; i < 1000; ++i) worst = std::max(worst, fd_laplacian_error(pr, n, b, U(rng), h));
            INFO("generation " << n << " branch " << b);
            CHECK(worst <= 1e-5);
            double a = lo + 0.01 * w, c = std::min(hi - 0.01 * w, a + 1.0);
            CHECK(phi_increment_error(pr, n, b, a, c) <= 1e-5);
        }
    }
}

TEST_CASE("ratio phi/g limits") {
    auto sc = build_scaffold(ScaffoldParams::defaults(2, 3, 3, 1), 5);
    PiecewiseProfile pr(sc);
    const auto& P = sc.params;
    for (const auto& G : sc.generations) {
        double at_rn = pr.eval(G.g_n).phi / G.g_n;
        double at_rp = pr.eval(G.g_prime).phi / G.g_prime;
        CHECK(at_rp > P.p1);
        if (G.n >= 3) {
            CHECK(std::fabs(at_rn - P.p2) <= 0.1 * P.p2);
            CHECK(std::fabs(at_rp - P.p1) <= 0.1 * P.p1);
        }
    }
    // approach from above toward p1 at r'
    for (std::size_t i = 1; i < sc.generations.size(); ++i)
        CHECK(pr.eval(sc.generations[i].g_prime).phi / sc.generations[i].g_prime <
              pr.eval(sc.generations[i - 1].g_prime).phi / sc.generations[i - 1].g_prime);
}

TEST_CASE("dense sampling: monotone phi, ratio band, localized extremes") {
    auto sc = build_scaffold(ScaffoldParams::defaults(2, 3, 3, 1), 5);
    PiecewiseProfile pr(sc);
    const auto& P = sc.params;
    double band_from = sc.generations[2].g_dprime;
    std::vector<double> gs;
    for (int i = 0; i < 200000; ++i) gs.push_back(0.01 + (pr.g_max() - 0.02) * i / 199999.0);
    auto ratios = ratio_profile(pr, gs);
    double prev_phi = -1;
    int bad_slope = 0, bad_band = 0;
    for (std::size_t i = 0; i < gs.size(); ++i) {
        auto v = pr.eval(gs[i]);
        if (v.s < 0 || v.phi < prev_phi) ++bad_slope;
        prev_phi = v.phi;
        if (gs[i] >= band_from && (ratios[i].second < P.p1 - 0.2 || ratios[i].second > P.p2 + 0.2)) ++bad_band;
    }
    CHECK(bad_slope == 0);
    CHECK(bad_band == 0);
    // per generation window [r''_{n-1}, r''_n): max near r_n, min near r'_n
    for (const auto& G : sc.generations) {
        double lo = G.n == 1 ? 0.5 : sc.generations[G.n - 2].g_dprime;
        double gmax = 0, gmin = 0, vmax = -1e300, vmin = 1e300;
        for (std::size_t i = 0; i < gs.size(); ++i) {
            if (gs[i] < lo || gs[i] >= G.g_dprime) continue;
            if (ratios[i].second > vmax) vmax = ratios[i].second, gmax = gs[i];
            if (ratios[i].second < vmin) vmin = ratios[i].second, gmin = gs[i];
        }
        if (G.n > 1) CHECK(std::fabs(gmax - G.g_n) <= 3.0);
        CHECK(std::fabs(gmin - G.g_prime) <= 3.0);
    }
}
