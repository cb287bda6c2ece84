#include "dg/profile.hpp"

#include <cmath>
#include <stdexcept>

namespace dg {

PiecewiseProfile::PiecewiseProfile(IrregularScaffold sc) : sc_(std::move(sc)) {
    if (sc_.generations.empty()) throw std::invalid_argument("profile needs at least one generation");
}

std::pair<double, double> PiecewiseProfile::branch_range(int n, int branch) const {
    int N = generation_count();
    if (n < 1 || n > N + 1) throw std::out_of_range("generation out of range");
    double lo1 = n == 1 ? 0.0 : sc_.generations[n - 2].g_dprime;
    if (n == N + 1) {
        if (branch != 1) throw std::out_of_range("only branch 1 exists past the last generation");
        return {lo1, sc_.g_end()};
    }
    const Generation& G = sc_.generations[n - 1];
    switch (branch) {
        case 1: return {lo1, G.g_n};
        case 2: return {G.g_n, G.g_prime};
        case 3: return {G.g_prime, G.g_hat};
        case 4: return {G.g_hat, G.g_star};
        case 5: return {G.g_star, G.g_dprime};
    }
    throw std::out_of_range("branch must be 1..5");
}

std::pair<int, int> PiecewiseProfile::locate(double g) const {
    if (!(g >= 0.0 && g < g_max())) throw std::out_of_range("g outside the constructed range");
    int N = generation_count();
    for (int n = 1; n <= N; ++n) {
        const Generation& G = sc_.generations[n - 1];
        if (g >= G.g_dprime) continue;
        if (g < G.g_n) return {n, 1};
        if (g < G.g_prime) return {n, 2};
        if (g < G.g_hat) return {n, 3};
        if (g < G.g_star) return {n, 4};
        return {n, 5};
    }
    return {N + 1, 1};
}

ProfilePoint PiecewiseProfile::eval(double g) const {
    auto [n, b] = locate(g);
    return eval_branch(n, b, g);
}

ProfilePoint PiecewiseProfile::eval_branch(int n, int branch, double g) const {
    const auto& P = sc_.params;
    int N = generation_count();
    ProfilePoint out;
    out.generation = n;
    out.branch = branch;
    double u = g + P.log_C;
    double r = -std::expm1(-g);

    if (branch == 1) {
        double eps = n <= N ? sc_.generations[n - 1].eps : sc_.generations[N - 1].eps_next;
        out.phi = (P.p2 + eps) * u;
        out.s = P.p2 + eps;
        out.lap_scaled = (P.p2 + eps) / r;
    } else {
        if (n > N) throw std::out_of_range("only branch 1 exists past the last generation");
        const Generation& G = sc_.generations[n - 1];
        double r_n = -std::expm1(-G.g_n);
        double R_term = std::exp(G.R.logmag + log_log_ratio(G.g_n, g));  // R log(r/r_n)
        double s2 = (P.p2 + G.eps) * r_n * std::exp(G.g_n - g) / r;
        if (branch == 2) {
            out.phi = (P.p2 + G.eps) * (G.g_n + P.log_C) + R_term;
            out.s = s2;
            out.lap_scaled = 0.0;
        } else {
            double lin = -std::expm1(G.g_prime - g);  // (r - r')/(1 - r')
            out.phi = P.p1 * u + R_term - P.p1 * lin;
            out.s = s2 + P.p1 * lin;
            out.lap_scaled = P.p1 / r * -std::expm1(G.g_prime - 2.0 * g);
            if (branch == 4) {
                out.phi += std::exp(G.M.logmag + log_int_log_ratio(G.g_hat, g, g));
                out.s += std::exp(G.M.logmag + log_r_diff(G.g_hat, g) - g) / r;
                out.lap_scaled += std::exp(G.M.logmag - 2.0 * g) / r;
            } else if (branch == 5) {
                out.phi += std::exp(G.M.logmag + log_int_log_ratio(G.g_hat, G.g_star, g));
                out.s += std::exp(G.M.logmag + log_r_diff(G.g_hat, G.g_star) - g) / r;
            } else if (branch != 3) {
                throw std::out_of_range("branch must be 1..5");
            }
        }
    }
    out.phi_prime = out.s > 0 ? LogValue::from_log(std::log(out.s) + g) : LogValue::from_double(out.s);
    out.laplacian = out.lap_scaled > 0 ? LogValue::from_log(std::log(out.lap_scaled) + 2.0 * g)
                                       : LogValue::from_double(out.lap_scaled);
    return out;
}

std::vector<Junction> junction_report(const PiecewiseProfile& prof) {
    static const char* names[] = {"r", "r'", "r^", "r*", "r''"};
    std::vector<Junction> out;
    int N = prof.generation_count();
    for (int n = 1; n <= N; ++n) {
        for (int b = 1; b <= 5; ++b) {
            // junction at the right end of branch b
            double g = prof.branch_range(n, b).second;
            int nr = b == 5 ? n + 1 : n;
            int br = b == 5 ? 1 : b + 1;
            auto L = prof.eval_branch(n, b, g);
            auto R = prof.eval_branch(nr, br, g);
            Junction j;
            j.g = g;
            j.generation = n;
            j.name = names[b - 1];
            j.phi_jump = std::fabs(L.phi - R.phi) / std::fabs(R.phi);
            j.dphi_jump = std::fabs(L.s - R.s) / std::fabs(R.s);
            out.push_back(j);
        }
    }
    return out;
}

std::vector<std::pair<double, double>> ratio_profile(const PiecewiseProfile& prof, const std::vector<double>& gs) {
    std::vector<std::pair<double, double>> out;
    out.reserve(gs.size());
    for (double g : gs) out.emplace_back(g, prof.eval(g).phi / g);
    return out;
}

}  // namespace dg
