#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dg/profile.hpp"

namespace dg {

enum class CellKind { A, A_hat, A_dprime, A_star, remainder };
const char* to_string(CellKind k);

// Cells carry their annulus density in t = 1 - r:
//   Delta(phi) r dr = (a / t^2 + b) dt,  beta = b e^{-2 g_lo}

struct PolarCell {
    double g_lo = 0, g_hi = 0;
    double theta_lo = 0, theta_hi = 0;
    double dtheta = 0;                // exact angular width; theta_hi - theta_lo rounds at large g
    double mass = 0;
    CellKind kind = CellKind::A;      // remainder for the modified last cell of an annulus
    CellKind annulus = CellKind::A;   // annulus the cell belongs to
    int generation = 0;
    double a = 0, beta = 0;           // density, beta taken at this cell's g_lo
    double aspect() const;            // max/min of radial and arc side lengths
};

struct Ring {
    int generation = 0;
    CellKind annulus = CellKind::A;
    double g_lo = 0, g_hi = 0;
    double ring_mass = 0;      // mass of the full ring
    std::int64_t n_cells = 0;
    double cell_angle = 0;     // angle of each regular cell
    bool merged = false;       // last ring of its annulus, split by mass with a remainder cell
    double a = 0, beta = 0;    // beta at this ring's g_lo
};

struct TruncationReport {
    std::int64_t enumerated = 0;
    double total = 0;  // total cell count (double: may exceed 2^63 in principle)
    bool truncated = false;
};

class Partition {
public:
    std::vector<Ring> rings;
    double g_max = 0;

    double total_cells() const;
    PolarCell cell(std::size_t ring, std::int64_t j) const;  // j in [0, n_cells)
    TruncationReport enumerate(const std::function<void(const PolarCell&)>& fn,
                               std::int64_t ceiling = 2000000) const;
};

// Mass-2 ring step for Delta r dr = p_eff / (1-r)^2 dr with m = floor(1/(1-r_k)) cells.
double next_ring_radius(double g_k, double p_eff);
// Same for the p1 branches, Delta r dr = p1 ((1-r)^{-2} - (1-r')^{-1}) dr.
double next_ring_radius_p1(double g_k, double p1, double g_prime);

// Radial mass 1/(2 pi) * int over the full circle, from density (a, beta at g_lo).
double radial_mass(double a, double beta, double g_lo, double g_hi);

// Rings of the annuli of one generation (A_n, A^_n, A*_n, A''_n), stopping at g_max.
Partition partition_region(const PiecewiseProfile& prof, int generation, double g_max);
// All generations whose annuli start below g_max.
Partition partition_all(const PiecewiseProfile& prof, double g_max);

struct Zero {
    double g = 0, theta = 0;
    int mult = 2;
    CellKind kind = CellKind::A;
};

struct ZeroCloud {
    std::vector<Zero> zeros;        // sorted by g
    std::vector<PolarCell> cells;   // source cells; zero i came from cells[source[i]]
    std::vector<std::size_t> source;
    int total_multiplicity() const;
};

// Delta-weighted mean of g over the cell's radial span.
double radial_centroid(double a, double beta, double g_lo, double g_hi);

ZeroCloud atomize(const std::vector<PolarCell>& cells);
ZeroCloud atomize(const Partition& part, std::int64_t ceiling = 2000000);

// log |(z - w)/(1 - conj(w) z)| with z, w in polar log-gap form.
double log_pseudo_hyperbolic(double gz, double tz, double gw, double tw);

// Mass-weighted integral of log|b_w(z)| over the cell (not divided by mass).
double cell_log_potential(const PolarCell& c, double gz, double tz);

// Sum over atoms of mult*log|b_zeta(z)| - mass * <log|b_w(z)|>_cell.
double surrogate_correction(const ZeroCloud& cloud, double gz, double tz);
// phi(|z|) + correction; -inf on an atom.
double eval_log_surrogate(const ZeroCloud& cloud, const PiecewiseProfile& prof, double gz, double tz);

// Whether z lies within eps (1 - |z|) of some zero.
bool in_excluded_set(const ZeroCloud& cloud, double gz, double tz, double eps);

// Angular measure (arc length) of {|z| = r} within eps (1 - r) of a zero.
double excluded_arc(const ZeroCloud& cloud, double g, double eps);

struct ApproximationStats {
    double max_stat = 0;  // max |surrogate - phi| / (1 + log+ g)
    double max_abs = 0;
    std::vector<double> abs_errors;  // per sample, NaN when the sample lies in E_eps
    int skipped = 0;
    std::vector<double> arc_measure;  // per sampled circle
    double c4 = 0;                    // max arc_measure / eps
};

struct PolarSample {
    double g, theta;
};

ApproximationStats approximation_report(const ZeroCloud& cloud, const PiecewiseProfile& prof,
                                        const std::vector<PolarSample>& samples, double eps,
                                        const std::vector<double>& circles);

}  // namespace dg
