#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dg/logderiv.hpp"
#include "dg/ode.hpp"
#include "dg/riesz.hpp"
#include "dg/wiman.hpp"
#include "emit.hpp"

using namespace dg;
using dgcli::check_row;
using dgcli::csv17;
using dgcli::json;

namespace {

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---------- scaffold parameters, shared by several subcommands

struct ScaffoldOpts {
    int k = 1;
    double p1 = 2, p2 = 3;
    std::optional<double> p, log_C, g1;
    double eta_offset = 1;
    int generations = 4;
};

void add_scaffold_opts(CLI::App* s, ScaffoldOpts& o) {
    s->add_option("--k", o.k, "equation order")->capture_default_str();
    s->add_option("--p1", o.p1, "lower degree")->capture_default_str();
    s->add_option("--p2", o.p2, "degree")->capture_default_str();
    s->add_option("--p", o.p, "profile exponent (default p2)");
    s->add_option("--log-C", o.log_C, "log C; a, b, g1 are rederived from it");
    s->add_option("--g1", o.g1, "g(r_1)");
    s->add_option("--eta-offset", o.eta_offset, "eta_n = n + offset")->capture_default_str();
    s->add_option("--generations", o.generations, "generation count")->capture_default_str()->check(CLI::Range(1, 64));
}

ScaffoldParams make_params(const ScaffoldOpts& o) {
    auto prm = ScaffoldParams::defaults(o.p1, o.p2, o.p.value_or(o.p2), o.k);
    if (o.log_C) {
        prm.log_C = *o.log_C;
        prm.rederive_constants();
    }
    if (o.g1) prm.g1 = *o.g1;
    double off = o.eta_offset;
    prm.eta = [off](int n) { return n + off; };
    prm.validate();
    return prm;
}

json params_json(const ScaffoldParams& p) {
    return {{"k", p.k}, {"p1", p.p1}, {"p2", p.p2}, {"p", p.p}, {"log_C", p.log_C},
            {"g1", p.g1}, {"a", p.a},   {"b", p.b}};
}

// ---------- scaffold

struct ScaffoldCmd {
    ScaffoldOpts s;
    std::string out = "-", csv;
};

void run_scaffold(const ScaffoldCmd& c) {
    auto sc = build_scaffold(make_params(c.s), c.s.generations);
    dgcli::LineWriter w(c.out);
    auto csv = dgcli::open_csv(c.csv, "n,g_rn,g_rprime,g_rhat,g_rstar,g_rdprime,eps,residual");
    w({{"type", "scaffold"}, {"params", params_json(sc.params)}, {"generations", sc.generations.size()},
       {"retries", sc.retries}, {"g_end", sc.g_end()}});
    for (const auto& G : sc.generations) {
        w({{"type", "generation"}, {"n", G.n},          {"g_n", G.g_n},           {"g_prime", G.g_prime},
           {"g_hat", G.g_hat},     {"g_star", G.g_star}, {"g_dprime", G.g_dprime}, {"g_next", G.g_next},
           {"eps", G.eps},         {"eps_next", G.eps_next}, {"eps_next_left", G.eps_next_left},
           {"log_R", G.R.logmag},  {"log_M", G.M.logmag}, {"cross_residual", G.cross_residual},
           {"ratio_g", G.ratio_g}, {"ratio_u", G.ratio_u}});
        if (csv)
            *csv << G.n << ',' << csv17(G.g_n) << ',' << csv17(G.g_prime) << ',' << csv17(G.g_hat) << ','
                 << csv17(G.g_star) << ',' << csv17(G.g_dprime) << ',' << csv17(G.eps) << ','
                 << csv17(G.cross_residual) << '\n';
    }
    for (const auto& G : sc.generations) {
        std::string n = std::to_string(G.n);
        w(check_row("scaffold", "closure cross residual, generation " + n, G.cross_residual <= 1e-9, G.cross_residual, 1e-9));
        w(check_row("scaffold", "|eps|, generation " + n, std::fabs(G.eps_next) < 0.5, std::fabs(G.eps_next), 0.5));
    }
}

// ---------- profile

struct ProfileCmd {
    ScaffoldOpts s;
    int samples = 2000;
    double g_min = 0.05;
    std::optional<double> g_max;
    std::string out = "-", csv;
};

void run_profile(const ProfileCmd& c) {
    PiecewiseProfile pr(build_scaffold(make_params(c.s), c.s.generations));
    double hi = std::min(c.g_max.value_or(pr.g_max()), std::nextafter(pr.g_max(), 0.0));
    if (!(c.g_min > 0 && c.g_min < hi)) throw ValidationError("need 0 < g-min < g-max < g_end");
    if (c.samples < 2) throw ValidationError("samples must be >= 2");
    dgcli::LineWriter w(c.out);
    auto csv = dgcli::open_csv(c.csv, "g,log_logM,ratio");
    double worst = 0;
    for (const auto& j : junction_report(pr)) {
        worst = std::max({worst, j.phi_jump, j.dphi_jump});
        w({{"type", "junction"}, {"generation", j.generation}, {"name", j.name}, {"g", j.g},
           {"phi_jump", j.phi_jump}, {"dphi_jump", j.dphi_jump}});
    }
    const auto& P = pr.scaffold().params;
    for (const auto& G : pr.scaffold().generations) {
        double at_rn = pr.eval(G.g_n).phi / G.g_n, at_rp = pr.eval(G.g_prime).phi / G.g_prime;
        w({{"type", "ratio"}, {"generation", G.n}, {"phi_over_g_rn", at_rn}, {"phi_over_g_rprime", at_rp}});
        if (G.n >= 3) {
            std::string n = std::to_string(G.n);
            double d2 = std::fabs(at_rn - P.p2) / P.p2, d1 = std::fabs(at_rp - P.p1) / P.p1;
            w(check_row("profile", "phi/g at r_n vs p2, generation " + n, d2 <= 0.1, d2, 0.1));
            w(check_row("profile", "phi/g at r'_n vs p1, generation " + n, d1 <= 0.1, d1, 0.1));
        }
    }
    w(check_row("profile", "max junction jump", worst <= 1e-9, worst, 1e-9));
    if (csv) {
        for (int i = 0; i < c.samples; ++i) {
            double g = c.g_min + (hi - c.g_min) * i / (c.samples - 1);
            double phi = pr.eval(g).phi;
            double ll = phi > 0 ? std::log(phi) : kNegInf;
            *csv << csv17(g) << ',' << csv17(ll) << ',' << csv17(ll / g) << '\n';
        }
    }
}

// ---------- riesz

struct RieszCmd {
    ScaffoldOpts s;
    int generation = 1;
    double g_max = 7.5;
    std::vector<double> eps{0.01, 0.05, 0.1};
    long long ceiling = 2000000;
    std::string out = "-", zeros;
};

void run_riesz(const RieszCmd& c) {
    PiecewiseProfile pr(build_scaffold(make_params(c.s), c.s.generations));
    if (c.generation < 1 || c.generation > pr.generation_count())
        throw ValidationError("generation out of range");
    for (double e : c.eps)
        if (!(e > 0 && e < 1)) throw ValidationError("eps must lie in (0, 1)");
    auto part = partition_region(pr, c.generation, c.g_max);
    dgcli::LineWriter w(c.out);
    double lo = 1e300, hi = 0;
    std::int64_t regular = 0, remainder = 0;
    auto rep = part.enumerate(
        [&](const PolarCell& cell) {
            if (cell.kind == CellKind::remainder) {
                ++remainder;
                return;
            }
            ++regular;
            lo = std::min(lo, cell.mass);
            hi = std::max(hi, cell.mass);
        },
        c.ceiling);
    w({{"type", "partition"}, {"generation", c.generation}, {"g_max", c.g_max}, {"rings", part.rings.size()},
       {"total_cells", part.total_cells()}, {"enumerated", rep.enumerated}, {"truncated", rep.truncated},
       {"regular_cells", regular}, {"remainder_cells", remainder}});
    if (regular > 0) {
        double dev = std::max(std::fabs(lo - 2), std::fabs(hi - 2));
        w(check_row("riesz", "regular cell mass - 2", dev <= 1e-12, dev, 1e-12));
    }
    if (rep.truncated) return;  // atoms need every cell

    auto cloud = atomize(part, c.ceiling);
    if (!c.zeros.empty()) {
        auto f = dgcli::open_csv(c.zeros, "g,theta,mult,kind");
        for (const auto& z : cloud.zeros)
            *f << csv17(z.g) << ',' << csv17(z.theta) << ',' << z.mult << ',' << to_string(z.kind) << '\n';
    }
    std::vector<double> circles;
    for (const auto& z : cloud.zeros)
        if (z.g > 1.0 && z.g < c.g_max - 1.0) circles.push_back(z.g);
    std::sort(circles.begin(), circles.end());
    circles.erase(std::unique(circles.begin(), circles.end()), circles.end());
    std::vector<double> c4;
    for (double e : c.eps) {
        auto st = approximation_report(cloud, pr, {}, e, circles);
        c4.push_back(st.c4);
        w({{"type", "arcs"}, {"eps", e}, {"circles", circles.size()}, {"c4", st.c4}});
    }
    w({{"type", "cloud"}, {"zeros", cloud.zeros.size()}, {"multiplicity", cloud.total_multiplicity()}});
    if (c4.size() > 1 && !circles.empty()) {
        double spread = *std::max_element(c4.begin(), c4.end()) / *std::min_element(c4.begin(), c4.end());
        w(check_row("riesz", "C4 spread across eps", spread <= 1.1, spread, 1.1));
    }
}

// ---------- series

struct SeriesCmd {
    std::string variant = "a";
    double lambda = 1, sigma = 2;
    std::optional<double> delta;
    int terms = 40;
    std::vector<long long> n;
    std::vector<double> gc;
    double log_a0 = 0;
    double g_min = 0.05;
    std::optional<double> g_max;  // default depends on the series
    int points = 400;
    long long max_terms = 1000;
    std::string out = "-", trace;
};

json term_json(const SparseSeries& s, std::int64_t k) {
    auto t = s.term(k);
    json j{{"type", "term"}, {"k", k}, {"log_n", t.n.log_n}, {"n_exact", t.n.exact}};
    if (t.n.exact) j["n"] = t.n.n;
    if (k > 0) j["g_break"] = t.g_break;
    auto la = s.log_coeff(k);  // log a, sign and log magnitude
    j["log_a"] = la.to_double();
    j["log_a_sign"] = la.sign;
    j["log_abs_log_a"] = la.logmag;
    return j;
}

void emit_series(const SparseSeries& s, json head, const SeriesCmd& c, double g_max,
                 const std::vector<json>& extra = {}) {
    if (!(c.g_min > 0 && c.g_min < g_max)) throw ValidationError("need 0 < g-min < g-max");
    if (c.points < 2) throw ValidationError("points must be >= 2");
    dgcli::LineWriter w(c.out);
    std::int64_t listed = std::min<std::int64_t>(s.size(), c.max_terms);
    head["terms"] = s.size();
    head["listed"] = listed;
    w(head);
    for (std::int64_t k = 0; k < listed; ++k) w(term_json(s, k));

    auto csv = dgcli::open_csv(c.trace, "g,log_mu,nu,K_log");
    double tw = 0;
    for (int i = 0; i < c.points; ++i) {
        double g = c.g_min * std::pow(g_max / c.g_min, static_cast<double>(i) / (c.points - 1));
        if (csv) {
            auto ci = central_index(s, LogGap(g));
            *csv << csv17(g) << ',' << csv17(log_max_term(s, LogGap(g)).to_double()) << ','
                 << (ci.n.exact ? std::to_string(ci.n.n) : csv17(ci.n.value())) << ','
                 << csv17(k_indicator(s, LogGap(g)).logmag) << '\n';
        }
        // from the first grid point: adjacent pairs would difference two nearly equal huge values
        if (i > 0) tw = std::max(tw, twostars_residual(s, LogGap(c.g_min), LogGap(g)));
    }
    w(check_row("series", "two-star residual", tw <= 1e-10, tw, 1e-10));
    // central index at the middle of each branch equals that branch's n
    if (s.newton()) {
        int bad = 0;
        for (std::int64_t k = 1; k + 1 < s.size(); ++k) {
            double a = s.term(k).g_break, b = s.term(k + 1).g_break;
            if (a > g_max) break;  // generated series can hold 2^62 terms
            if (!(std::isfinite(a) && std::isfinite(b))) continue;
            if (!(central_index(s, LogGap(0.5 * (a + b))).n == s.term(k).n)) ++bad;
        }
        w(check_row("series", "central index exactness", bad == 0, bad, 0));
    }
    for (const auto& j : extra) w(j);
}

void run_prop43(const SeriesCmd& c) {
    if (c.variant != "a" && c.variant != "b") throw ValidationError("variant must be a or b");
    auto v = c.variant == "a" ? Prop43Variant::a : Prop43Variant::b;
    auto s = build_prop43(v, c.lambda, c.sigma, c.delta, c.terms);
    json head{{"type", "series"}, {"kind", "prop43"}, {"variant", c.variant}, {"sigma", c.sigma}};
    if (v == Prop43Variant::b) {
        double d = c.delta.value_or(default_delta(c.lambda, c.sigma));
        head["lambda"] = c.lambda;
        head["delta"] = d;
        head["critical_delta"] = critical_delta(c.lambda, c.sigma);
    }
    std::vector<json> extra;
    if (v == Prop43Variant::b) {
        double d = head["delta"].get<double>();
        int last = std::min(20, static_cast<int>(s.size()) - 2);
        double worst = -1e300;
        for (int k = 5; k <= last; ++k) {
            LogGap rk(prop43b_g(c.lambda, c.sigma, d, k) - std::log(2.0));
            worst = std::max(worst, k_excess(s, rk, k).to_double());
        }
        if (last >= 5) extra.push_back(check_row("series", "K(r_k) - n_k, k>=5", worst < 1.0, worst, 1.0));
    }
    // log mu walks every term below the central index: variant (a) costs ~ e^{(sigma+1) g}
    emit_series(s, head, c, c.g_max.value_or(v == Prop43Variant::a ? 5.0 : 100.0), extra);
}

void run_flm1(const SeriesCmd& c) {
    if (c.n.empty() || c.n.size() != c.gc.size() + 1) throw ValidationError("need |n| = |gc| + 1 >= 1");
    std::vector<ExtCount> ne;
    for (auto v : c.n) ne.push_back(ExtCount::of(v));
    auto s = build_flm1(ne, c.gc, c.log_a0);
    double top = c.gc.empty() ? 5.0 : c.gc.back() + 2.0;
    emit_series(s, {{"type", "series"}, {"kind", "flm1"}, {"log_a0", c.log_a0}}, c, c.g_max.value_or(top));
}

// ---------- logderiv

struct IalphaCmd {
    double s = 1, alpha = 0.5, R = 0.9, R0 = 0;
    std::string out = "-";
};

void run_ialpha(const IalphaCmd& c) {
    if (!(c.R > 0 && c.R < 1 && c.R0 >= 0 && c.R0 < c.R)) throw ValidationError("need 0 <= R0 < R < 1");
    double s = c.s;
    LogMModel m{[s](double g) { return std::exp(s * g); }, s, s};
    auto v = i_alpha(m, c.alpha, LogGap::from_r(c.R), LogGap::from_r(c.R0));
    dgcli::LineWriter w(c.out);
    json j{{"type", "i_alpha"}, {"model_s", s}, {"alpha", c.alpha}, {"R", c.R}, {"R0", c.R0},
           {"log_I", v.logmag}, {"I", v.to_double()}};
    w(j);
    if (s == 1 && c.alpha == 0.5 && c.R0 == 0) {
        double R = c.R, want = (R - (1 - R) * std::log(1 / (1 - R)) + 1) / ((1 - R) * (1 - R));
        double err = std::fabs(v.to_double() / want - 1);
        w(check_row("logderiv", "i_alpha closed form", err <= 1e-6, err, 1e-6));
    }
}

struct WindowsCmd {
    double lambda = 1, eta = 0.5;
    std::vector<double> gn;
    int dyadic = 12;
    std::string out = "-";
};

void run_windows(const WindowsCmd& c) {
    std::vector<double> gn = c.gn;
    if (gn.empty())
        for (int n = 1; n <= c.dyadic; ++n) gn.push_back(std::ldexp(1.0, n));
    auto set = loworder_windows(c.lambda, c.eta, gn);
    auto d = upper_density(set);
    dgcli::LineWriter w(c.out);
    for (const auto& [a, b] : set.intervals) w({{"type", "window"}, {"g_lo", a}, {"g_hi", b}});
    w({{"type", "density"}, {"value", d.value}, {"resolved", d.resolved}, {"flagged", d.flagged}});
    w(check_row("logderiv", "window density - 1", std::fabs(d.value - 1) <= 1e-3, std::fabs(d.value - 1), 1e-3));
}

struct CertCmd {
    double p = 2, eps = 0.01;
    int windows = 6, n_theta = 256;
    std::string out = "-";
};

void run_certificate(const CertCmd& c) {
    if (!(c.p > 0)) throw ValidationError("p must be positive");
    if (c.windows < 1) throw ValidationError("windows must be >= 1");
    double p = c.p;
    LogDerivSpec f;
    f.log_abs_ratio = [p](double g, double th) {
        double t = std::exp(-g), r = -std::expm1(-g), s = std::sin(0.5 * th);
        return std::log(p) - 0.5 * (p + 1) * std::log(t * t + 4 * r * s * s);
    };
    f.lambda = f.sigma = p;
    RadialWindowSet win;
    for (int n = 0; n < c.windows; ++n) win.intervals.emplace_back(1.0 + 5 * n, 3.0 + 5 * n);
    CertificateOptions opt;
    opt.n_theta = c.n_theta;
    auto rep = logderiv_certificate(f, 1, 0, c.eps, win, opt);
    dgcli::LineWriter w(c.out);
    for (const auto& r : rep.windows)
        w({{"type", "window"}, {"g_lo", r.g_lo}, {"g_hi", r.g_hi}, {"max_statistic", r.max_statistic},
           {"samples", r.samples}, {"excluded", r.excluded}});
    w({{"type", "certificate"}, {"p", p}, {"exponent", rep.exponent}, {"fitted_C", rep.fitted_C}, {"note", rep.note}});
    w(check_row("logderiv", "zero-free statistic <= p", rep.fitted_C <= p * (1 + 1e-12), rep.fitted_C, p));
}

// ---------- ode

json inequalities(double p1, double p2, int k, double lambda, double sigma, double tol) {
    auto t = thm13a_check(p1, k, lambda, sigma);
    auto b = cor14_check(p1, p2, k, lambda, tol);
    return {{"thm13a", {{"pass", t.pass}, {"margin", t.margin}}}, {"cor14", {{"pass", b.pass}, {"margin", b.margin}}}};
}

json predicted_json(double p1, double p2, int k, double p) {
    try {
        auto o = predict_orders(p1, p2, k, p);
        return {{"sigma", o.sigma}, {"alpha", o.alpha}, {"lambda", o.lambda}};
    } catch (const std::invalid_argument&) {
        return nullptr;  // outside the predictor's range
    }
}

void emit_audit(dgcli::LineWriter& w, const std::string& src, const json& j) {
    for (const char* key : {"thm13a", "cor14"}) {
        const auto& e = j["inequalities"][key];
        w(check_row(src, std::string(key) + " margin", e["pass"].get<bool>(), e["margin"].get<double>(), 0.0));
    }
}

struct PredictCmd {
    int k = 1;
    double p1 = 2, p2 = 4, p = 4;
    std::string out = "-";
};

void run_predict(const PredictCmd& c) {
    auto o = predict_orders(c.p1, c.p2, c.k, c.p);
    dgcli::LineWriter w(c.out);
    json j{{"type", "predict"},
           {"params", {{"k", c.k}, {"p1", c.p1}, {"p2", c.p2}, {"p", c.p}}},
           {"sigma", o.sigma},
           {"alpha", o.alpha},
           {"lambda", o.lambda},
           {"inequalities", inequalities(c.p1, c.p2, c.k, o.lambda, o.sigma, 1e-12)}};
    w(j);
    emit_audit(w, "ode predict", j);
}

struct SolveCmd {
    double c = -2;
    int q = 3, k = 1;
    double g_min = 0.25, g_top = 4, min_span = 2.5, tol = 0.15;
    int samples = 40;
    long long max_degree = 5000000;
    std::optional<double> p1, p2;
    std::string estimator = "slope";
    std::string out = "-", csv;
};

void run_solve(const SolveCmd& c) {
    if (c.q < 0) throw ValidationError("q must be >= 0");
    if (c.k < 1) throw ValidationError("k must be >= 1");
    if (!(c.g_min > 0 && c.g_min < c.g_top)) throw ValidationError("need 0 < g-min < g-top");
    if (c.estimator != "slope" && c.estimator != "tail") throw ValidationError("estimator must be slope or tail");
    std::vector<double> init(c.k, 0.0);
    init[0] = 1.0;
    auto A = CoeffSpec::from_power(c.c, c.q, 0);
    // grow the degree until the tail is negligible at g-top
    long long D = 1000;
    SolutionSeries f;
    for (;;) {
        f = taylor_solve(A, c.k, init, static_cast<int>(D));
        if (f.tail_gauge(c.g_top) < -40) break;
        if (D >= c.max_degree) throw std::runtime_error("degree cap reached before the tail converged; lower g-top");
        D = std::min(2 * D, c.max_degree);
    }
    dgcli::LineWriter w(c.out);
    auto csv = dgcli::open_csv(c.csv, "g,log_logM,ratio");
    std::vector<std::pair<double, double>> smp;
    for (int i = 0; i < c.samples; ++i) {
        double g = c.g_min + (c.g_top - c.g_min) * i / std::max(1, c.samples - 1);
        double lm = f.positive() ? f.log_abs(g) : f.log_max_modulus(g, 256);
        double ll = lm > 0 ? std::log(lm) : kNegInf;
        if (std::isfinite(ll)) smp.push_back({g, ll});
        if (csv) *csv << csv17(g) << ',' << csv17(ll) << ',' << csv17(ll / g) << '\n';
    }
    EstimateOptions opt;
    opt.min_span = c.min_span;
    auto gi = estimate_orders(smp, {}, opt);
    double p1 = c.p1.value_or(c.q), p2 = c.p2.value_or(c.q);
    bool slope = c.estimator == "slope";
    double lam = slope ? gi.lambda_slope : gi.lambda, sig = slope ? gi.sigma_slope : gi.sigma;
    json j{{"type", "ode_solve"},
           {"params", {{"c", c.c}, {"q", c.q}, {"k", c.k}, {"p1", p1}, {"p2", p2}, {"g_top", c.g_top}}},
           {"degree", D},
           {"tail_gauge", f.tail_gauge(c.g_top)},
           {"sigma_hat", gi.sigma},
           {"lambda_hat", gi.lambda},
           {"sigma_slope", gi.sigma_slope},
           {"lambda_slope", gi.lambda_slope},
           {"estimator", c.estimator},
           {"predicted", predicted_json(p1, p2, c.k, p2)},
           {"inequalities", inequalities(p1, p2, c.k, lam, sig, c.tol)}};
    w(j);
    emit_audit(w, "ode solve", j);
}

struct BoundCmd {
    ScaffoldOpts s;
    std::optional<double> g_max;
    int samples = 400;
    double tol = 0.15;
    std::string out = "-", csv;
};

void run_bound(const BoundCmd& c) {
    PiecewiseProfile pr(build_scaffold(make_params(c.s), c.s.generations));
    const auto& P = pr.scaffold().params;
    auto A = CoeffSpec::majorant([&pr](double g) { return pr.eval(g).phi; }, P.p1, P.p2);
    double top = std::min(c.g_max.value_or(pr.g_max()), std::nextafter(pr.g_max(), 0.0));
    if (c.samples < 32) throw ValidationError("samples must be >= 32");
    dgcli::LineWriter w(c.out);
    auto csv = dgcli::open_csv(c.csv, "g,log_logM,ratio");
    std::vector<std::pair<double, double>> smp;
    for (int i = 0; i < c.samples; ++i) {
        double g = 1.0 + (top - 1.0) * i / (c.samples - 1);
        double ll = growth_majorant(A, P.k, LogGap(g)).logmag;
        smp.push_back({g, ll});
        if (csv) *csv << csv17(g) << ',' << csv17(ll) << ',' << csv17(ll / g) << '\n';
    }
    auto gi = estimate_orders(smp);
    json j{{"type", "growth_bound"},
           {"params", params_json(P)},
           {"g_max", top},
           {"sigma_hat", gi.sigma},
           {"lambda_hat", gi.lambda},
           {"sigma_slope", gi.sigma_slope},
           {"lambda_slope", gi.lambda_slope},
           {"predicted", predicted_json(P.p1, P.p2, P.k, P.p)},
           {"inequalities", inequalities(P.p1, P.p2, P.k, gi.lambda, gi.sigma, c.tol)}};
    w(j);
    emit_audit(w, "ode bound", j);
}

struct XiCmd {
    int k = 2;
    double p1 = 5, p2 = 6, eps = 0;
    std::string out = "-";
};

void run_xibeta(const XiCmd& c) {
    auto x = xi_beta(c.k, c.p1, c.p2, c.eps);
    dgcli::LineWriter w(c.out);
    w({{"type", "xi_beta"}, {"k", c.k}, {"p1", c.p1}, {"p2", c.p2}, {"eps", c.eps}, {"xi", x.xi}, {"beta", x.beta},
       {"identity_residual", x.identity_residual}});
    w(check_row("ode xibeta", "beta identity residual", x.identity_residual <= 1e-12, x.identity_residual, 1e-12));
    bool inside = c.p1 == c.p2 ? x.xi == c.p2 : (x.xi > c.p1 && x.xi < c.p2);
    w(check_row("ode xibeta", "xi in [p1, p2]", inside, x.xi, c.p2));
}

struct HalphaCmd {
    double alpha = 2, kappa1 = 0.2, kappa2 = 0.5;
    std::string out = "-";
};

void run_halpha(const HalphaCmd& c) {
    auto [s, l] = h_alpha_orders(c.alpha, c.kappa1, c.kappa2);
    dgcli::LineWriter w(c.out);
    w({{"type", "h_alpha"}, {"alpha", c.alpha}, {"kappa1", c.kappa1}, {"kappa2", c.kappa2}, {"sigma", s}, {"lambda", l}});
}

struct PmppvkCmd {
    double C = 1, q = 2;
    std::vector<double> g{std::log(100.0), 6, 8, 10, 12};
    std::string out = "-";
};

void run_pmppvk(const PmppvkCmd& c) {
    dgcli::LineWriter w(c.out);
    for (const auto& pt : pmppvk_check(c.C, c.q, c.g))
        w({{"type", "pmppvk"}, {"g", pt.g}, {"value", pt.value}, {"deviation", pt.deviation}});
}

// ---------- report

struct ReportCmd {
    std::vector<std::string> in;
    std::string md = "-", csv;
};

std::string md_escape(std::string s) {
    std::string o;
    for (char ch : s) {
        if (ch == '|') o += '\\';
        o += ch;
    }
    return o;
}

void run_report(const ReportCmd& c) {
    struct Row {
        std::string source, check;
        bool pass;
        double value, bound;
    };
    std::vector<Row> rows;
    for (const auto& path : c.in) {
        std::ifstream f(path);
        if (!f) throw ValidationError("missing input: " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error&) {
                throw ValidationError(path + ":" + std::to_string(lineno) + ": not a JSON line");
            }
            if (!j.is_object() || !j.contains("check")) continue;
            auto num = [](const json& v) {
                if (v.is_number()) return v.get<double>();
                if (v.is_string()) return std::stod(v.get<std::string>());  // "inf", "nan"
                return std::nan("");
            };
            std::string src = j.value("source", j.contains("group") ? j["group"].get<std::string>() : path);
            rows.push_back({src, j["check"].get<std::string>(), j.value("pass", false), num(j.value("value", json())),
                            num(j.value("bound", json()))});
        }
    }
    std::ostringstream md;
    md << "| source | check | value | bound | result |\n|---|---|---|---|---|\n";
    int passed = 0;
    for (const auto& r : rows) {
        passed += r.pass;
        md << "| " << md_escape(r.source) << " | " << md_escape(r.check) << " | " << csv17(r.value) << " | "
           << csv17(r.bound) << " | " << (r.pass ? "pass" : "FAIL") << " |\n";
    }
    md << "\n" << passed << "/" << rows.size() << " checks passed\n";
    if (c.md == "-") std::cout << md.str();
    else {
        std::ofstream f(c.md);
        if (!f) throw ValidationError("cannot open output file: " + c.md);
        f << md.str();
    }
    if (auto csv = dgcli::open_csv(c.csv, "source,check,value,bound,pass")) {
        auto quote = [](const std::string& s) {
            std::string o = "\"";
            for (char ch : s) o += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            return o + "\"";
        };
        for (const auto& r : rows)
            *csv << quote(r.source) << ',' << quote(r.check) << ',' << csv17(r.value) << ',' << csv17(r.bound) << ','
                 << (r.pass ? 1 : 0) << '\n';
    }
}

int fail(int code, const std::string& kind, const std::string& msg) {
    std::cerr << dgcli::dump17(json{{"error", kind}, {"message", msg}, {"exit_code", code}}) << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"disc growth toolkit"};
    app.set_config("--config", "", "INI file; [section] per subcommand, flags override");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    auto out_opt = [](CLI::App* s, std::string& out) {
        s->add_option("--out", out, "JSON-lines output, - for stdout")->capture_default_str();
    };

    ScaffoldCmd scaffold;
    auto* s_scaffold = app.add_subcommand("scaffold", "build the irregular scaffold");
    add_scaffold_opts(s_scaffold, scaffold.s);
    out_opt(s_scaffold, scaffold.out);
    s_scaffold->add_option("--csv", scaffold.csv, "scaffold CSV");

    ProfileCmd profile;
    auto* s_profile = app.add_subcommand("profile", "evaluate the piecewise profile");
    add_scaffold_opts(s_profile, profile.s);
    out_opt(s_profile, profile.out);
    s_profile->add_option("--csv", profile.csv, "radial samples CSV");
    s_profile->add_option("--samples", profile.samples)->capture_default_str();
    s_profile->add_option("--g-min", profile.g_min)->capture_default_str();
    s_profile->add_option("--g-max", profile.g_max);

    RieszCmd riesz;
    auto* s_riesz = app.add_subcommand("riesz", "partition one generation into mass-2 cells and atomize");
    add_scaffold_opts(s_riesz, riesz.s);
    out_opt(s_riesz, riesz.out);
    s_riesz->add_option("--generation", riesz.generation)->capture_default_str();
    s_riesz->add_option("--g-max", riesz.g_max)->capture_default_str();
    s_riesz->add_option("--eps", riesz.eps)->delimiter(',')->capture_default_str();
    s_riesz->add_option("--ceiling", riesz.ceiling, "cell enumeration cap")->capture_default_str();
    s_riesz->add_option("--zeros", riesz.zeros, "zero cloud CSV");

    SeriesCmd series;
    auto* s_series = app.add_subcommand("series", "sparse power series");
    s_series->require_subcommand(1);
    auto series_common = [&](CLI::App* s) {
        out_opt(s, series.out);
        s->add_option("--trace", series.trace, "indicator trace CSV");
        s->add_option("--g-min", series.g_min)->capture_default_str();
        s->add_option("--g-max", series.g_max, "default 5 for (a), 100 for (b), last gc + 2 for flm1");
        s->add_option("--points", series.points)->capture_default_str();
        s->add_option("--max-terms", series.max_terms, "term records written")->capture_default_str();
    };
    auto* s_prop43 = s_series->add_subcommand("prop43", "the two order-separating constructions");
    s_prop43->add_option("--variant", series.variant)->check(CLI::IsMember({"a", "b"}))->capture_default_str();
    s_prop43->add_option("--lambda", series.lambda)->capture_default_str();
    s_prop43->add_option("--sigma", series.sigma)->capture_default_str();
    s_prop43->add_option("--delta", series.delta);
    s_prop43->add_option("--terms", series.terms)->capture_default_str();
    series_common(s_prop43);
    auto* s_flm1 = s_series->add_subcommand("flm1", "series with prescribed central index jumps");
    s_flm1->add_option("--n", series.n, "exponents, first 0")->delimiter(',')->required();
    s_flm1->add_option("--gc", series.gc, "g of the jump radii")->delimiter(',');
    s_flm1->add_option("--log-a0", series.log_a0)->capture_default_str();
    series_common(s_flm1);

    auto* s_logd = app.add_subcommand("logderiv", "logarithmic derivative estimates");
    s_logd->require_subcommand(1);
    IalphaCmd ialpha;
    auto* s_ialpha = s_logd->add_subcommand("ialpha", "I_alpha for log+ M = (1-t)^{-s}");
    s_ialpha->add_option("--s", ialpha.s)->capture_default_str();
    s_ialpha->add_option("--alpha", ialpha.alpha)->capture_default_str();
    s_ialpha->add_option("--R", ialpha.R)->capture_default_str();
    s_ialpha->add_option("--R0", ialpha.R0)->capture_default_str();
    out_opt(s_ialpha, ialpha.out);
    WindowsCmd windows;
    auto* s_windows = s_logd->add_subcommand("windows", "low-order windows and their upper density");
    s_windows->add_option("--lambda", windows.lambda)->capture_default_str();
    s_windows->add_option("--eta", windows.eta)->capture_default_str();
    s_windows->add_option("--gn", windows.gn, "window tops; default 2^n")->delimiter(',');
    s_windows->add_option("--dyadic", windows.dyadic, "n count for the default tops")->capture_default_str();
    out_opt(s_windows, windows.out);
    CertCmd cert;
    auto* s_cert = s_logd->add_subcommand("certificate", "statistic for exp((1-z)^{-p}), k=1, j=0");
    s_cert->add_option("--p", cert.p)->capture_default_str();
    s_cert->add_option("--eps", cert.eps)->capture_default_str();
    s_cert->add_option("--windows", cert.windows)->capture_default_str();
    s_cert->add_option("--n-theta", cert.n_theta)->capture_default_str();
    out_opt(s_cert, cert.out);

    auto* s_ode = app.add_subcommand("ode", "f^(k) + A f = 0");
    s_ode->require_subcommand(1);
    PredictCmd predict;
    auto* s_predict = s_ode->add_subcommand("predict", "predicted orders");
    s_predict->add_option("--k", predict.k)->capture_default_str();
    s_predict->add_option("--p1", predict.p1)->capture_default_str();
    s_predict->add_option("--p2", predict.p2)->capture_default_str();
    s_predict->add_option("--p", predict.p)->capture_default_str();
    out_opt(s_predict, predict.out);
    SolveCmd solve;
    auto* s_solve = s_ode->add_subcommand("solve", "Taylor solution for A = c (1-z)^{-q}");
    s_solve->add_option("--c", solve.c)->capture_default_str();
    s_solve->add_option("--q", solve.q)->capture_default_str();
    s_solve->add_option("--k", solve.k)->capture_default_str();
    s_solve->add_option("--g-min", solve.g_min)->capture_default_str();
    s_solve->add_option("--g-top", solve.g_top)->capture_default_str();
    s_solve->add_option("--samples", solve.samples)->capture_default_str();
    s_solve->add_option("--min-span", solve.min_span)->capture_default_str();
    s_solve->add_option("--max-degree", solve.max_degree)->capture_default_str();
    s_solve->add_option("--p1", solve.p1, "declared lower degree (default q)");
    s_solve->add_option("--p2", solve.p2, "declared degree (default q)");
    s_solve->add_option("--tol", solve.tol, "band tolerance")->capture_default_str();
    s_solve->add_option("--estimator", solve.estimator)->check(CLI::IsMember({"slope", "tail"}))->capture_default_str();
    s_solve->add_option("--csv", solve.csv, "radial samples CSV");
    out_opt(s_solve, solve.out);
    BoundCmd bound;
    auto* s_bound = s_ode->add_subcommand("bound", "growth bound driven by the scaffold profile");
    add_scaffold_opts(s_bound, bound.s);
    s_bound->add_option("--g-max", bound.g_max);
    s_bound->add_option("--samples", bound.samples)->capture_default_str();
    s_bound->add_option("--tol", bound.tol)->capture_default_str();
    s_bound->add_option("--csv", bound.csv, "radial samples CSV");
    out_opt(s_bound, bound.out);
    XiCmd xi;
    auto* s_xi = s_ode->add_subcommand("xibeta", "xi_eps and beta");
    s_xi->add_option("--k", xi.k)->capture_default_str();
    s_xi->add_option("--p1", xi.p1)->capture_default_str();
    s_xi->add_option("--p2", xi.p2)->capture_default_str();
    s_xi->add_option("--eps", xi.eps)->capture_default_str();
    out_opt(s_xi, xi.out);
    HalphaCmd ha;
    auto* s_ha = s_ode->add_subcommand("halpha", "orders of h_alpha");
    s_ha->add_option("--alpha", ha.alpha)->capture_default_str();
    s_ha->add_option("--kappa1", ha.kappa1)->capture_default_str();
    s_ha->add_option("--kappa2", ha.kappa2)->capture_default_str();
    out_opt(s_ha, ha.out);
    PmppvkCmd pm;
    auto* s_pm = s_ode->add_subcommand("pmppvk", "(rho/r)^{1/(1-r)} against e");
    s_pm->add_option("--C", pm.C)->capture_default_str();
    s_pm->add_option("--q", pm.q)->capture_default_str();
    s_pm->add_option("--g", pm.g)->delimiter(',')->capture_default_str();
    out_opt(s_pm, pm.out);

    ReportCmd report;
    auto* s_report = app.add_subcommand("report", "collate check rows into markdown and CSV");
    s_report->add_option("--in", report.in, "JSON-lines inputs")->delimiter(',');
    s_report->add_option("--md", report.md, "markdown output, - for stdout")->capture_default_str();
    s_report->add_option("--csv", report.csv, "CSV output");

    for (auto* s : app.get_subcommands([](CLI::App*) { return true; })) {
        s->allow_config_extras(CLI::config_extras_mode::error);
        for (auto* t : s->get_subcommands([](CLI::App*) { return true; }))
            t->allow_config_extras(CLI::config_extras_mode::error);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(2, "validation", e.what());
    }

    try {
        if (s_scaffold->parsed()) run_scaffold(scaffold);
        else if (s_profile->parsed()) run_profile(profile);
        else if (s_riesz->parsed()) run_riesz(riesz);
        else if (s_prop43->parsed()) run_prop43(series);
        else if (s_flm1->parsed()) run_flm1(series);
        else if (s_ialpha->parsed()) run_ialpha(ialpha);
        else if (s_windows->parsed()) run_windows(windows);
        else if (s_cert->parsed()) run_certificate(cert);
        else if (s_predict->parsed()) run_predict(predict);
        else if (s_solve->parsed()) run_solve(solve);
        else if (s_bound->parsed()) run_bound(bound);
        else if (s_xi->parsed()) run_xibeta(xi);
        else if (s_ha->parsed()) run_halpha(ha);
        else if (s_pm->parsed()) run_pmppvk(pm);
        else if (s_report->parsed()) run_report(report);
    } catch (const std::invalid_argument& e) {
        return fail(2, "validation", e.what());
    } catch (const std::out_of_range& e) {
        return fail(2, "validation", e.what());
    } catch (const std::exception& e) {
        return fail(3, "numerical", e.what());
    }
    return 0;
}
