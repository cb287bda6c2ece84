#include "doctest.h"
#include "dg/riesz.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace dg;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const PiecewiseProfile& reference_profile() {
    static PiecewiseProfile pr(build_scaffold(ScaffoldParams::defaults(2, 3, 3, 1), 4));
    return pr;
}

// Small C so that every annulus kind of generation 1 sits below g ~ 22.
const PiecewiseProfile& compact_profile() {
    static PiecewiseProfile pr([] {
        auto p = ScaffoldParams::defaults(2, 3, 4, 1);
        p.log_C = 4.0;
        p.rederive_constants();
        p.g1 = 8.0;
        return build_scaffold(p, 2);
    }());
    return pr;
}

// 1/(2 pi) int int Delta(phi) dm_2 over the cell, from the profile's Laplacian.
// Adaptive in g, 7-point Gauss in theta over the exact width.
double quadrature_mass(const PiecewiseProfile& pr, const PolarCell& c) {
    QuadOptions opt;  // default 1e-10; boost's estimate floors near 1e-11
    auto radial = [&](double g) {
        auto v = pr.eval(std::min(g, std::nextafter(c.g_hi, 0.0)));
        double r = -std::expm1(-g);
        return v.lap_scaled * r * std::exp(g);  // Delta r dr = lap_scaled r e^g dg
    };
    auto outer = [&](double) { return integrate(radial, c.g_lo, c.g_hi, opt); };
    double ht = 0.5 * c.dtheta;
    return boost::math::quadrature::gauss<double, 7>::integrate([&](double s) { return outer(c.theta_lo + ht + s); },
                                                                -ht, ht) /
           kTwoPi;
}

}  // namespace

TEST_CASE("next_ring_radius closed form") {
    double g = std::log(10.0);  // r = 0.9
    double gn = next_ring_radius(g, 4.0);
    CHECK(LogGap(gn).r() == doctest::Approx(1.4 / 1.5).epsilon(1e-14));
    // mass equation: p (r1 - r0) / (m (1-r0)(1-r1)) = 2
    double r0 = 0.9, r1 = LogGap(gn).r();
    CHECK(4.0 * (r1 - r0) / (10.0 * 0.1 * (1 - r1)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(radial_mass(4.0, 0.0, g, gn) / 10.0 == doctest::Approx(2.0).epsilon(1e-12));
    // gap ratio (r_{k+1} - r_k)/(1 - r_{k+1}) -> 2/p
    double gk = 30.0;
    double gk1 = next_ring_radius(gk, 3.0);
    CHECK(std::expm1(gk1 - gk) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    // p1 branches: mass 2 with the -p1/(1-r') term
    for (double gp : {10.0, 14.0}) {
        for (double g0 : {gp, gp + 0.3, gp + 3.0}) {
            double g1 = next_ring_radius_p1(g0, 2.0, gp);
            double beta = -2.0 * std::exp(gp - 2.0 * g0);
            CHECK(radial_mass(2.0, beta, g0, g1) / std::floor(std::exp(g0)) == doctest::Approx(2.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("partition of generation 1") {
    const auto& pr = reference_profile();
    auto part = partition_region(pr, 1, 25.0);
    REQUIRE(!part.rings.empty());
    for (std::size_t i = 0; i < part.rings.size(); ++i) {
        const auto& R = part.rings[i];
        CHECK(R.annulus == CellKind::A);
        if (i + 1 < part.rings.size()) CHECK(R.g_hi == part.rings[i + 1].g_lo);
        if (!R.merged) {
            CHECK(R.n_cells == static_cast<std::int64_t>(std::floor(std::exp(R.g_lo))));
            CHECK(part.cell(i, R.n_cells / 2).mass == doctest::Approx(2.0).epsilon(1e-12));
        }
    }
    CHECK(part.rings.back().g_hi >= 25.0);
    // regular cells enumerated under a ceiling: mass 2 each, and truncation reported
    double mass = 0;
    auto rep = part.enumerate([&](const PolarCell& c) { mass += c.mass; }, 5000);
    CHECK(rep.truncated);
    CHECK(rep.enumerated == 5000);
    CHECK(rep.total == part.total_cells());
    CHECK(mass == doctest::Approx(2.0 * 5000).epsilon(1e-12));
}

TEST_CASE("cell mass against 2D quadrature") {
    std::mt19937_64 rng(3);
    auto check_cells = [&](const PiecewiseProfile& pr, double g_max, int count) {
        auto part = partition_all(pr, g_max);
        std::uniform_int_distribution<std::size_t> pick(0, part.rings.size() - 1);
        for (int i = 0; i < count; ++i) {
            std::size_t ring = pick(rng);
            std::uniform_int_distribution<std::int64_t> pj(0, part.rings[ring].n_cells - 1);
            auto c = part.cell(ring, pj(rng));
            INFO(to_string(c.kind) << " g=[" << c.g_lo << "," << c.g_hi << "]");
            CHECK(std::fabs(quadrature_mass(pr, c) - c.mass) <= 1e-6);
            if (c.kind != CellKind::remainder) CHECK(c.mass == doctest::Approx(2.0).epsilon(1e-12));
            else CHECK((c.mass >= 2.0 && c.mass < 4.0));
        }
        // every ring's last cell
        for (std::size_t ring = 0; ring < part.rings.size(); ++ring) {
            auto c = part.cell(ring, part.rings[ring].n_cells - 1);
            CHECK(std::fabs(quadrature_mass(pr, c) - c.mass) <= 1e-6);
        }
    };
    check_cells(reference_profile(), 25.0, 50);
    check_cells(compact_profile(), 26.0, 50);
}

TEST_CASE("annulus kinds and remainder cells") {
    const auto& pr = compact_profile();
    auto part = partition_region(pr, 1, 40.0);
    int remainders = 0;
    bool seen[4] = {false, false, false, false};
    for (std::size_t i = 0; i < part.rings.size(); ++i) {
        const auto& R = part.rings[i];
        seen[static_cast<int>(R.annulus)] = true;
        if (R.merged) {
            auto c = part.cell(i, R.n_cells - 1);
            CHECK(c.kind == CellKind::remainder);
            CHECK(c.mass >= 2.0);
            CHECK(c.mass < 4.0);
            ++remainders;
        }
    }
    CHECK(remainders == 4);  // Q_{n1..4}
    for (bool s : seen) CHECK(s);
    // A* ring is a single ring across the annulus
    const auto& G = pr.scaffold().generations[0];
    for (const auto& R : part.rings)
        if (R.annulus == CellKind::A_star) {
            CHECK(R.g_lo == G.g_hat);
            CHECK(R.g_hi == G.g_star);
        }
}

TEST_CASE("cell side comparability") {
    double lo = 1e300, hi = 0;
    for (const PiecewiseProfile* pr : {&reference_profile(), &compact_profile()}) {
        auto part = partition_all(*pr, 25.0);
        for (std::size_t i = 0; i < part.rings.size(); ++i) {
            for (std::int64_t j : {std::int64_t{0}, part.rings[i].n_cells - 1}) {
                double a = part.cell(i, j).aspect();
                lo = std::min(lo, a);
                hi = std::max(hi, a);
            }
        }
    }
    CHECK(hi / lo <= 8.0);
    CHECK(hi <= 20.0);
}

TEST_CASE("atomize") {
    CHECK(atomize(std::vector<PolarCell>{}).zeros.empty());
    const auto& pr = compact_profile();
    auto part = partition_region(pr, 1, 8.5);
    auto one = atomize(std::vector<PolarCell>{part.cell(3, 0)});
    REQUIRE(one.zeros.size() == 1);
    CHECK(one.zeros[0].mult == 2);
    CHECK(one.zeros[0].theta == doctest::Approx(0.5 * (part.cell(3, 0).theta_hi)));

    auto cl = atomize(part);
    double mass = 0;
    int expected = 0;
    for (const auto& c : cl.cells) {
        mass += c.mass;
        expected += (c.kind == CellKind::remainder && c.mass >= 3.0) ? 4 : 2;
    }
    CHECK(cl.total_multiplicity() == expected);
    CHECK(std::fabs(cl.total_multiplicity() - mass) < 2.0 * 4);
    CHECK(std::is_sorted(cl.zeros.begin(), cl.zeros.end(), [](const Zero& a, const Zero& b) { return a.g < b.g; }));
    for (std::size_t i = 0; i < cl.zeros.size(); ++i) {
        const auto& c = cl.cells[cl.source[i]];
        CHECK(cl.zeros[i].g >= c.g_lo);
        CHECK(cl.zeros[i].g <= c.g_hi);
    }
}

TEST_CASE("radial centroid against quadrature") {
    auto centroid_oracle = [](double a, double beta, double g_lo, double g_hi) {
        // Delta-weighted mean of t = 1 - r, weight (a/t^2 + b) dt, b = beta e^{2 g_lo}
        QuadOptions opt;
        opt.rel_tol = 1e-10;
        double b = beta * std::exp(2 * g_lo);
        auto w = [&](double g) { double t = std::exp(-g); return (a / (t * t) + b) * t; };
        double num = integrate([&](double g) { return std::exp(-g) * w(g); }, g_lo, g_hi, opt);
        double den = integrate(w, g_lo, g_hi, opt);
        return -std::log(num / den);
    };
    // Delta proportional to (1-r)^{-2}
    for (auto [lo, hi] : {std::pair{0.0, 0.51}, std::pair{5.3, 5.8}, std::pair{20.0, 20.7}}) {
        double want = centroid_oracle(3.0, 0.0, lo, hi);
        CHECK(std::fabs(radial_centroid(3.0, 0.0, lo, hi) - want) <= 1e-8);
    }
    // A* density
    const auto& G = compact_profile().scaffold().generations[0];
    double beta = std::exp(G.M.logmag - 2 * G.g_hat) - 2.0 * std::exp(G.g_prime - 2 * G.g_hat);
    CHECK(std::fabs(radial_centroid(2.0, beta, G.g_hat, G.g_star) - centroid_oracle(2.0, beta, G.g_hat, G.g_star)) <=
          1e-8);
}

TEST_CASE("pseudo-hyperbolic kernel") {
    // direct complex evaluation at moderate radii
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.05, 4.0), T(-3, 3);
    for (int i = 0; i < 200; ++i) {
        double gz = U(rng), gw = U(rng), tz = T(rng), tw = T(rng);
        std::complex<double> z = std::polar(-std::expm1(-gz), tz), w = std::polar(-std::expm1(-gw), tw);
        double direct = std::log(std::abs((z - w) / (1.0 - std::conj(w) * z)));
        CHECK(log_pseudo_hyperbolic(gz, tz, gw, tw) == doctest::Approx(direct).epsilon(1e-10));
    }
    CHECK(log_pseudo_hyperbolic(3.0, 1.0, 3.0, 1.0) == kNegInf);
    // deep in the disc, no cancellation: same radius, angle 1e-12
    // same radius: |b|^2 = s^2 / ((1 - r^2)^2 + s^2), s = 2 r sin(dtheta/2)
    for (double dt : {1e-12, 1e-15}) {
        double t = std::exp(-30.0), r = 1 - t;
        double s = 2 * r * std::sin(dt / 2), q = t * (2 - t);
        double want = 0.5 * (2 * std::log(s) - std::log(q * q + s * s));
        CHECK(log_pseudo_hyperbolic(30.0, 0.0, 30.0, dt) == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("cell potential: near field against a fine product rule") {
    const auto& pr = reference_profile();
    auto part = partition_region(pr, 1, 6.0);
    auto c = part.cell(8, 3);
    auto brute = [&](double gz, double tz) {
        using Q = boost::math::quadrature::gauss<double, 30>;
        int P = 40;  // panels per side
        double s = 0;
        for (int i = 0; i < P; ++i)
            for (int k = 0; k < P; ++k) {
                double g0 = c.g_lo + (c.g_hi - c.g_lo) * i / P, g1 = c.g_lo + (c.g_hi - c.g_lo) * (i + 1) / P;
                double t0 = c.theta_lo + (c.theta_hi - c.theta_lo) * k / P;
                double t1 = c.theta_lo + (c.theta_hi - c.theta_lo) * (k + 1) / P;
                s += Q::integrate(
                    [&](double g) {
                        double w = (c.a * std::exp(g) + c.beta * std::exp(2 * c.g_lo - g)) / kTwoPi;
                        return w * Q::integrate([&](double t) { return log_pseudo_hyperbolic(gz, tz, g, t); }, t0, t1);
                    },
                    g0, g1);
            }
        return s;
    };
    double tm = 0.5 * (c.theta_lo + c.theta_hi);
    // outside the cell, one cell width away in angle; and far away
    for (auto [gz, tz] : {std::pair{0.5 * (c.g_lo + c.g_hi), c.theta_hi + 0.3 * (c.theta_hi - c.theta_lo)},
                          std::pair{c.g_hi + 0.2, tm}, std::pair{1.0, tm + 2.0}}) {
        CHECK(cell_log_potential(c, gz, tz) == doctest::Approx(brute(gz, tz)).epsilon(1e-7));
    }
    // inside: mass times average is finite and below the atom term's log singularity
    double inside = cell_log_potential(c, 0.5 * (c.g_lo + c.g_hi), tm + 0.1 * (c.theta_hi - c.theta_lo));
    CHECK(std::isfinite(inside));
    CHECK(inside < 0);
}

TEST_CASE("surrogate basics") {
    const auto& pr = reference_profile();
    ZeroCloud empty;
    CHECK(eval_log_surrogate(empty, pr, 3.0, 1.0) == pr.eval(3.0).phi);
    auto part = partition_region(pr, 1, 4.0);
    auto cl = atomize(part);
    const auto& z0 = cl.zeros[cl.zeros.size() / 2];
    CHECK(eval_log_surrogate(cl, pr, z0.g, z0.theta) == kNegInf);
    double near = eval_log_surrogate(cl, pr, z0.g, z0.theta + 1e-9);
    CHECK(near < pr.eval(z0.g).phi - 30.0);
}

TEST_CASE("far-field correction bound") {
    const auto& pr = reference_profile();
    auto part = partition_region(pr, 1, 8.0);
    std::vector<PolarCell> far;
    part.enumerate([&](const PolarCell& c) {
        if (c.g_lo >= 5.0) far.push_back(c);
    });
    auto cl = atomize(far);
    double sum_t = 0;
    for (const auto& z : cl.zeros) sum_t += std::exp(-z.g);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> G(0.01, std::log(2.0)), T(0, kTwoPi);
    for (int i = 0; i < 10; ++i) {
        double gz = G(rng), tz = T(rng);
        double corr = surrogate_correction(cl, gz, tz);
        CHECK(std::fabs(corr) <= 4.0 * sum_t / std::exp(-gz));
    }
}

TEST_CASE("excluded arcs") {
    const auto& pr = reference_profile();
    auto cl = atomize(partition_region(pr, 1, 7.0));
    CHECK(excluded_arc(cl, 3.0, 0.0) == 0.0);
    // single zero: arc = 2 r * 2 asin(sqrt((delta^2 - d^2)/(4 r rho)))
    ZeroCloud one;
    one.zeros.push_back({4.0, 1.0, 2, CellKind::A});
    double g = 4.0 + 1e-3, eps = 0.05;
    double r = LogGap(g).r(), rho = LogGap(4.0).r();
    double delta = eps * std::exp(-g), d = std::exp(-4.0) - std::exp(-g);
    double want = r * 4.0 * std::asin(std::sqrt((delta * delta - d * d) / (4 * r * rho)));
    CHECK(excluded_arc(one, g, eps) == doctest::Approx(want).epsilon(1e-12));
    // a zero near theta = 0 wraps around
    one.zeros[0].theta = 1e-6;
    CHECK(excluded_arc(one, g, eps) == doctest::Approx(want).epsilon(1e-9));

    std::vector<double> circles;
    for (const auto& z : cl.zeros)
        if (z.g > 1.0 && z.g < 6.0) circles.push_back(z.g);
    std::sort(circles.begin(), circles.end());
    circles.erase(std::unique(circles.begin(), circles.end()), circles.end());
    std::vector<double> c4;
    for (double e : {0.01, 0.05, 0.1}) {
        auto st = approximation_report(cl, pr, {}, e, circles);
        c4.push_back(st.c4);
        for (double m : st.arc_measure) CHECK(m <= st.c4 * e * (1 + 1e-12));
    }
    // linear in eps: the fitted constants agree
    CHECK(*std::max_element(c4.begin(), c4.end()) <= 1.1 * *std::min_element(c4.begin(), c4.end()));
}

TEST_CASE("approximation error stays O(1 + log g)") {
    const auto& pr = reference_profile();
    auto cl = atomize(partition_region(pr, 1, 7.5));
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> G(0.3, 5.5), T(0, kTwoPi);
    std::vector<PolarSample> samples;
    for (int i = 0; i < 60; ++i) samples.push_back({G(rng), T(rng)});
    auto st = approximation_report(cl, pr, samples, 0.05, {});
    CHECK(st.skipped < 30);
    CHECK(std::isfinite(st.max_stat));
    CHECK(st.max_stat < 5.0);
    double lo_half = 0, hi_half = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (std::isnan(st.abs_errors[i])) continue;
        (samples[i].g < 2.9 ? lo_half : hi_half) =
            std::max(samples[i].g < 2.9 ? lo_half : hi_half, st.abs_errors[i]);
    }
    CHECK(hi_half <= 2.0 * lo_half + 1.0);
}
