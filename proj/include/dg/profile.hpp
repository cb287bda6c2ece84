#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dg/scaffold.hpp"

namespace dg {

struct ProfilePoint {
    double phi = 0;
    LogValue phi_prime;   // dphi/dr
    LogValue laplacian;   // (1/r)(r phi')'
    double s = 0;         // phi' (1-r), O(1) everywhere
    double lap_scaled = 0;  // laplacian (1-r)^2
    int generation = 0;
    int branch = 0;  // 1..5, left to right within a generation
};

class PiecewiseProfile {
public:
    explicit PiecewiseProfile(IrregularScaffold sc);

    const IrregularScaffold& scaffold() const { return sc_; }
    double g_max() const { return sc_.g_end(); }  // eval defined on [0, g_max)

    ProfilePoint eval(double g) const;  // throws std::out_of_range outside [0, g_max)
    std::pair<int, int> locate(double g) const;  // (generation, branch), right-continuous
    // Evaluate one branch formula at any g, ignoring branch bounds.
    ProfilePoint eval_branch(int generation, int branch, double g) const;
    // [lo, hi) of a branch in g; empty when lo == hi (branch 3 when p = p2)
    std::pair<double, double> branch_range(int generation, int branch) const;
    int generation_count() const { return static_cast<int>(sc_.generations.size()); }

private:
    IrregularScaffold sc_;
};

struct Junction {
    double g;
    int generation;
    std::string name;  // r, r', r^, r*, r''
    double phi_jump;   // relative
    double dphi_jump;  // relative, on phi'
};

std::vector<Junction> junction_report(const PiecewiseProfile& prof);

std::vector<std::pair<double, double>> ratio_profile(const PiecewiseProfile& prof, const std::vector<double>& gs);

}  // namespace dg
