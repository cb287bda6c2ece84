#include "dg/wiman.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace dg {

namespace {

constexpr double kLog2to62 = 62.0 * 0.69314718055994530942;
constexpr double kWindowCut = -45.0;  // terms below e^-45 of the maximum are dropped

LogValue log_inv_r(double g) { return LogValue::from_log(loglog_inv_r(g)); }

bool lv_less(const LogValue& a, const LogValue& b) { return (a - b).sign < 0; }

// w is derived from g_break when only the latter is set
LogValue w_of(const SeriesTerm& t) { return std::isnan(t.g_break) || !t.w.is_zero() ? t.w : log_inv_r(t.g_break); }

}  // namespace

// ---- ExtCount ---------------------------------------------------------------

ExtCount ExtCount::of(std::int64_t n) {
    if (n < 0) throw std::invalid_argument("count must be nonnegative");
    ExtCount c;
    c.n = n;
    c.log_n = n > 0 ? std::log(static_cast<double>(n)) : kNegInf;
    c.exact = true;
    return c;
}

ExtCount ExtCount::from_log(double log_n) {
    if (log_n < 53.0 * 0.69314718055994530942) return of(std::llround(std::exp(log_n)));
    ExtCount c;
    c.log_n = log_n;
    c.exact = false;
    return c;
}

double ExtCount::value() const { return exact ? static_cast<double>(n) : std::exp(log_n); }

std::string ExtCount::str() const {
    if (exact) return std::to_string(n);
    std::ostringstream os;
    os.precision(17);
    os << "exp(" << log_n << ")";
    return os.str();
}

bool operator==(const ExtCount& a, const ExtCount& b) {
    if (a.exact && b.exact) return a.n == b.n;
    return a.exact == b.exact && a.log_n == b.log_n;
}

bool operator<(const ExtCount& a, const ExtCount& b) {
    if (a.exact && b.exact) return a.n < b.n;
    return a.log_n < b.log_n;
}

LogValue count_diff(const ExtCount& a, const ExtCount& b) {
    if (a.exact && b.exact) return LogValue::from_double(static_cast<double>(a.n - b.n));
    if (a.log_n == b.log_n) return LogValue::zero();
    if (a.log_n > b.log_n) return {1, a.log_n + log1mexp(a.log_n - b.log_n)};
    return {-1, b.log_n + log1mexp(b.log_n - a.log_n)};
}

// ---- SparseSeries -------------------------------------------------------------

namespace {

bool breakpoints_increasing(const std::vector<SeriesTerm>& t) {
    for (std::size_t k = 2; k < t.size(); ++k) {
        if (!std::isnan(t[k].g_break) && !std::isnan(t[k - 1].g_break)) {
            if (t[k].g_break < t[k - 1].g_break) return false;
        } else if ((w_of(t[k]) - w_of(t[k - 1])).sign > 0) {
            return false;
        }
    }
    return true;
}

// Upper envelope of log a + n x; returns indices of the active terms.
std::vector<std::size_t> upper_hull(const std::vector<std::pair<std::int64_t, double>>& p) {
    std::vector<std::size_t> h;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (h.size() >= 2) {
            const auto& a = p[h[h.size() - 2]];
            const auto& b = p[h.back()];
            const auto& c = p[i];
            double cross = (static_cast<double>(b.first - a.first)) * (c.second - a.second) -
                           (b.second - a.second) * static_cast<double>(c.first - a.first);
            if (cross >= 0) h.pop_back();  // b on or below the chord: never strictly maximal
            else break;
        }
        h.push_back(i);
    }
    return h;
}

}  // namespace

SparseSeries SparseSeries::from_terms(std::vector<SeriesTerm> terms, double log_a0) {
    if (terms.empty()) throw std::invalid_argument("series needs at least one term");
    for (std::size_t k = 1; k < terms.size(); ++k)
        if (!(terms[k - 1].n < terms[k].n)) throw std::invalid_argument("term counts must increase strictly");
    SparseSeries s;
    s.newton_ = breakpoints_increasing(terms);
    if (!s.newton_) throw std::invalid_argument("breakpoints must not decrease; use from_coefficients for general series");
    s.count_ = static_cast<std::int64_t>(terms.size());
    s.terms_ = std::move(terms);
    s.log_a0_ = log_a0;
    return s;
}

SparseSeries SparseSeries::from_coefficients(const std::vector<std::pair<std::int64_t, double>>& p) {
    if (p.empty() || p[0].first != 0) throw std::invalid_argument("series must start with the n = 0 term");
    std::vector<SeriesTerm> t;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (k > 0 && p[k].first <= p[k - 1].first) throw std::invalid_argument("term counts must increase strictly");
        if (!std::isfinite(p[k].second)) throw std::invalid_argument("log coefficient must be finite");
        SeriesTerm st;
        st.n = ExtCount::of(p[k].first);
        if (k > 0)
            st.w = LogValue::from_double((p[k].second - p[k - 1].second) / static_cast<double>(p[k].first - p[k - 1].first));
        t.push_back(st);
    }
    SparseSeries s;
    s.count_ = static_cast<std::int64_t>(t.size());
    s.log_a0_ = p[0].second;
    s.newton_ = breakpoints_increasing(t);
    s.terms_ = std::move(t);
    if (!s.newton_) {
        auto h = upper_hull(p);
        std::vector<std::pair<std::int64_t, double>> q;
        for (auto i : h) q.push_back(p[i]);
        s.hull_ = std::make_shared<SparseSeries>(from_coefficients(q));
        s.raw_log_a_.reserve(p.size());
        for (const auto& x : p) s.raw_log_a_.push_back(x.second);
    }
    return s;
}

SparseSeries SparseSeries::generated(std::int64_t count, Generator gen, double log_a0) {
    if (count < 1) throw std::invalid_argument("series needs at least one term");
    SparseSeries s;
    s.count_ = count;
    s.gen_ = std::move(gen);
    s.log_a0_ = log_a0;
    return s;
}

SeriesTerm SparseSeries::term(std::int64_t k) const {
    if (k < 0 || k >= count_) throw std::out_of_range("term index out of range");
    return gen_ ? gen_(k) : terms_[static_cast<std::size_t>(k)];
}

const SparseSeries& SparseSeries::hull() const { return newton_ ? *this : *hull_; }

LogValue SparseSeries::log_coeff(std::int64_t k) const {
    if (!raw_log_a_.empty()) return LogValue::from_double(raw_log_a_.at(static_cast<std::size_t>(k)));
    LseAccumulator pos, neg;
    auto add = [&](const LogValue& v) {
        if (v.sign > 0) pos.add(v.logmag);
        else if (v.sign < 0) neg.add(v.logmag);
    };
    add(LogValue::from_double(log_a0_));
    ExtCount prev = term(0).n;
    for (std::int64_t j = 1; j <= k; ++j) {
        SeriesTerm t = term(j);
        add(count_diff(t.n, prev) * w_of(t));
        prev = t.n;
    }
    return LogValue::from_log(pos.log_sum()) - LogValue::from_log(neg.log_sum());
}

// ---- evaluation -------------------------------------------------------------------

namespace {

// T_k - T_{k-1} at g, as a LogValue.
LogValue step(const SeriesTerm& prev, const SeriesTerm& t, double g) {
    LogValue dn = count_diff(t.n, prev.n);
    LogValue d;
    if (!std::isnan(t.g_break)) {
        if (g > t.g_break) d = LogValue::from_log(log_log_ratio(t.g_break, g));
        else if (g < t.g_break) d = -LogValue::from_log(log_log_ratio(g, t.g_break));
    } else {
        d = t.w - log_inv_r(g);
    }
    return dn * d;
}

// Same as a double; cheap path for exact counts with a known breakpoint.
double step_double(const SeriesTerm& prev, const SeriesTerm& t, double g) {
    if (!std::isnan(t.g_break) && t.n.exact && prev.n.exact)
        return static_cast<double>(t.n.n - prev.n.n) * log_ratio(t.g_break, g);
    return step(prev, t, g).to_double();
}

// Calls fn(k, n_k, D_k) with D_k = T_k - T_max for all terms with D_k >= kWindowCut.
template <class F>
void window(const SparseSeries& s, double g, F fn) {
    if (!s.newton()) {
        double lr = log_r_of_g(g);
        std::vector<double> T;
        double mx = kNegInf;
        for (std::int64_t k = 0; k < s.size(); ++k) {
            T.push_back(s.log_coeff(k).to_double() + static_cast<double>(s.term(k).n.n) * lr);
            mx = std::max(mx, T.back());
        }
        for (std::int64_t k = 0; k < s.size(); ++k)
            if (T[k] - mx >= kWindowCut) fn(k, s.term(k).n, T[k] - mx);
        return;
    }
    std::int64_t c = central_index(s, LogGap(g)).k;
    SeriesTerm tc = s.term(c);
    fn(c, tc.n, 0.0);
    double D = 0;
    SeriesTerm hi = tc;
    for (std::int64_t k = c - 1; k >= 0; --k) {
        SeriesTerm lo = s.term(k);
        D -= step_double(lo, hi, g);
        if (!(D >= kWindowCut)) break;
        fn(k, lo.n, D);
        hi = lo;
    }
    D = 0;
    SeriesTerm lo = tc;
    for (std::int64_t k = c + 1; k < s.size(); ++k) {
        SeriesTerm t = s.term(k);
        D += step_double(lo, t, g);
        if (!(D >= kWindowCut)) break;
        fn(k, t.n, D);
        lo = t;
    }
}

}  // namespace

CentralIndex central_index(const SparseSeries& s0, LogGap g) {
    const SparseSeries& s = s0.hull();
    // last k with T_k >= T_{k-1}; the predicate holds on a prefix
    auto overtakes = [&](std::int64_t k) {
        SeriesTerm t = s.term(k);
        if (!std::isnan(t.g_break)) return g.g >= t.g_break;
        return !lv_less(t.w, log_inv_r(g.g));
    };
    std::int64_t lo = 0, hi = s.size();  // overtakes(lo..) unknown; answer in [0, size)
    while (hi - lo > 1) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (overtakes(mid)) lo = mid;
        else hi = mid;
    }
    CentralIndex out;
    out.n = s.term(lo).n;
    // map back to the full series' index
    if (&s != &s0) {
        for (std::int64_t k = 0; k < s0.size(); ++k)
            if (s0.term(k).n == out.n) { out.k = k; break; }
    } else {
        out.k = lo;
    }
    return out;
}

LogValue log_max_term(const SparseSeries& s0, LogGap g) {
    const SparseSeries& s = s0.hull();
    std::int64_t c = central_index(s, g).k;
    LseAccumulator acc;  // all steps up to the central index are nonnegative
    SeriesTerm prev = s.term(0);
    for (std::int64_t k = 1; k <= c; ++k) {
        SeriesTerm t = s.term(k);
        LogValue d = step(prev, t, g.g);
        if (d.sign > 0) acc.add(d.logmag);
        prev = t;
    }
    LogValue base = LogValue::from_double(s.log_a0());
    // n_0 log r for a nonzero first count
    SeriesTerm t0 = s.term(0);
    if (t0.n.log_n > kNegInf) base = base - LogValue::from_log(t0.n.log_n + loglog_inv_r(g.g));
    return base + LogValue::from_log(acc.log_sum());
}

LogValue log_mu_increment(const SparseSeries& s0, LogGap g0, LogGap g) {
    if (!(g0.g < g.g)) throw std::invalid_argument("increment needs g0 < g");
    const SparseSeries& s = s0.hull();
    std::int64_t k0 = central_index(s, g0).k, k1 = central_index(s, g).k;
    LseAccumulator acc;
    for (std::int64_t k = k0; k <= k1; ++k) {
        SeriesTerm t = s.term(k);
        if (t.n.log_n == kNegInf) continue;
        // branch of term k: [rho_k, rho_{k+1}) clipped to [r0, r]
        double lo_g = g0.g, hi_g = g.g;
        LogValue lo_v, hi_v;
        bool exact_lo = true, exact_hi = true;
        if (k > k0) {
            if (!std::isnan(t.g_break)) lo_g = t.g_break;
            else exact_lo = false, lo_v = t.w;
        }
        if (k < k1) {
            SeriesTerm tn = s.term(k + 1);
            if (!std::isnan(tn.g_break)) hi_g = tn.g_break;
            else exact_hi = false, hi_v = tn.w;
        }
        LogValue len;  // log(r_hi / r_lo)
        if (exact_lo && exact_hi) {
            if (hi_g > lo_g) len = LogValue::from_log(log_log_ratio(lo_g, hi_g));
        } else {
            if (exact_lo) lo_v = log_inv_r(lo_g);
            if (exact_hi) hi_v = log_inv_r(hi_g);
            len = lo_v - hi_v;
        }
        if (len.sign > 0) acc.add(t.n.log_n + len.logmag);
    }
    return LogValue::from_log(acc.log_sum());
}

double twostars_residual(const SparseSeries& s, LogGap g0, LogGap g) {
    if (!(g0.g < g.g)) throw std::invalid_argument("twostars_residual needs g0 < g");
    LogValue lhs = log_max_term(s, g) - log_max_term(s, g0);
    LogValue rhs = log_mu_increment(s, g0, g);
    LogValue diff = lhs - rhs;
    double scale = std::max(0.0, rhs.logmag);
    return diff.is_zero() ? 0.0 : std::exp(diff.logmag - scale);
}

ConvexSamples log_mu_samples(const SparseSeries& s, const std::vector<double>& g_grid) {
    ConvexSamples out;
    for (std::size_t i = 0; i < g_grid.size(); ++i) {
        LogValue h = log_max_term(s, LogGap(g_grid[i]));
        if (h.sign <= 0) throw std::invalid_argument("log mu must be positive on the grid");
        out.g.push_back(g_grid[i]);
        out.log_h.push_back(h.logmag);
        if (i + 1 < g_grid.size()) out.log_dh.push_back(log_mu_increment(s, LogGap(g_grid[i]), LogGap(g_grid[i + 1])).logmag);
    }
    return out;
}

LogValue k_indicator(const SparseSeries& s, LogGap g) {
    LseAccumulator num, den;
    window(s, g.g, [&](std::int64_t, const ExtCount& n, double D) {
        den.add(D);
        if (n.log_n > kNegInf) num.add(n.log_n + D);
    });
    if (num.empty()) return LogValue::zero();
    return LogValue::from_log(num.log_sum() - den.log_sum());
}

LogValue k_excess(const SparseSeries& s, LogGap g, std::int64_t k_ref) {
    ExtCount ref = s.term(k_ref).n;
    LseAccumulator pos, neg, den;
    window(s, g.g, [&](std::int64_t, const ExtCount& n, double D) {
        den.add(D);
        LogValue d = count_diff(n, ref);
        if (d.sign > 0) pos.add(d.logmag + D);
        else if (d.sign < 0) neg.add(d.logmag + D);
    });
    LogValue num = LogValue::from_log(pos.log_sum()) - LogValue::from_log(neg.log_sum());
    if (num.is_zero()) return num;
    return {num.sign, num.logmag - den.log_sum()};
}

double strelitz_check(const SparseSeries& s, int m, LogGap g) {
    if (m < 0) throw std::invalid_argument("derivative order must be nonnegative");
    LseAccumulator num, den, kn;
    window(s, g.g, [&](std::int64_t, const ExtCount& n, double D) {
        den.add(D);
        if (n.log_n > kNegInf) kn.add(n.log_n + D);
        // falling factorial n (n-1) ... (n-m+1)
        if (n.exact && n.n < m) return;
        double lf = 0;
        for (int i = 0; i < m; ++i)
            lf += n.exact ? std::log(static_cast<double>(n.n - i)) : n.log_n + std::log1p(-i * std::exp(-n.log_n));
        num.add(lf + D);
    });
    if (num.empty()) return 0.0;
    double log_k = kn.log_sum() - den.log_sum();
    return std::exp(num.log_sum() - den.log_sum() - (m == 0 ? 0.0 : m * log_k));
}

// ---- constructions ------------------------------------------------------------------

SparseSeries build_flm1(const std::vector<ExtCount>& n_seq, const std::vector<double>& g_c, double log_a0) {
    if (n_seq.empty()) throw std::invalid_argument("need at least n_0");
    if (g_c.size() + 1 < n_seq.size()) throw std::invalid_argument("need c_0..c_{K-1} for K+1 counts");
    std::vector<SeriesTerm> t;
    for (std::size_t k = 0; k < n_seq.size(); ++k) {
        if (k > 0 && !(n_seq[k - 1] < n_seq[k])) throw std::invalid_argument("n_seq must increase strictly");
        SeriesTerm st;
        st.n = n_seq[k];
        if (k > 0) {
            double gc = g_c[k - 1];
            if (!(gc > 0) || !std::isfinite(gc)) throw std::invalid_argument("c_k must lie in (0,1)");
            if (k > 1 && gc < g_c[k - 2]) throw std::invalid_argument("c_seq must be nondecreasing");
            st.g_break = gc;
            st.w = log_inv_r(gc);
        }
        t.push_back(st);
    }
    return SparseSeries::from_terms(std::move(t), log_a0);
}

SparseSeries build_flm1(const std::vector<std::int64_t>& n_seq, const std::vector<double>& c_seq, double log_a0) {
    std::vector<ExtCount> n;
    for (auto x : n_seq) {
        if (x < 0) throw std::invalid_argument("n_seq must be nonnegative");
        n.push_back(ExtCount::of(x));
    }
    std::vector<double> g;
    for (double c : c_seq) {
        if (!(c > 0 && c < 1)) throw std::invalid_argument("c_k must lie in (0,1)");
        g.push_back(LogGap::from_r(c).g);
    }
    return build_flm1(n, g, log_a0);
}

double critical_delta(double lambda, double sigma) {
    if (!(lambda > 0 && lambda < sigma)) throw std::invalid_argument("need 0 < lambda < sigma");
    double q = lambda / sigma;
    // y = x^{-(sigma+1)} >= 1 solves y^{1/q} = y + 1; F is increasing in y
    auto F = [q](double y) { return std::pow(y, 1.0 / q) - y - 1.0; };
    double hi = 2.0;
    while (F(hi) <= 0) hi *= 2.0;
    double y = find_root(F, 1.0, hi);
    return std::pow(y, -1.0 / (sigma + 1.0));
}

double default_delta(double lambda, double sigma) {
    double q = lambda / sigma;
    return 0.9 * std::min(critical_delta(lambda, sigma), std::exp(-1.0 / (sigma * (1.0 - q))));
}

double prop43b_g(double lambda, double sigma, double delta, int k) {
    return std::pow(sigma / lambda, k) * -std::log(delta);
}

SparseSeries build_prop43(Prop43Variant v, double lambda, double sigma, std::optional<double> delta, int terms) {
    if (!(sigma > 0) || !std::isfinite(sigma)) throw std::invalid_argument("need 0 < sigma < inf");
    if (v == Prop43Variant::a) {
        // n_k = k; c_j = 1 - (sigma/(j+sigma+1))^{1/(sigma+1)}, a_{k+1} = a_0 prod c_j^{-1}
        double kmax = sigma * std::exp((sigma + 1.0) * 40.0) - sigma - 1.0;
        std::int64_t count = kmax > 4.0e18 ? (std::int64_t{1} << 62) : static_cast<std::int64_t>(kmax) + 2;
        auto gen = [sigma](std::int64_t k) {
            SeriesTerm t;
            t.n = ExtCount::of(k);
            if (k > 0) {
                double j = static_cast<double>(k - 1);
                t.g_break = std::log1p((j + 1.0) / sigma) / (sigma + 1.0);
            }
            return t;
        };
        return SparseSeries::generated(count, gen, 0.0);
    }
    if (!(lambda > 0 && lambda < sigma)) throw std::invalid_argument("variant b needs 0 < lambda < sigma");
    double q = lambda / sigma;
    double d = delta ? *delta : default_delta(lambda, sigma);
    if (!(d > 0 && d < 1)) throw std::invalid_argument("delta must lie in (0,1)");
    if (d > critical_delta(lambda, sigma))
        throw std::invalid_argument("delta too large: 1/x^(sigma+1) + 1 <= 1/x^((sigma+1)/q) fails on (0, delta]");
    if (!(d < std::exp(-1.0 / (sigma * (1.0 - q)))))
        throw std::invalid_argument("delta too large: need delta < exp(-1/(sigma (1-q)))");
    if (terms < 2) throw std::invalid_argument("need at least two terms");
    std::vector<ExtCount> n{ExtCount::of(0)};
    std::vector<double> g;
    for (int k = 0; k + 1 < terms; ++k) {
        double gk = prop43b_g(lambda, sigma, d, k);
        double E = (sigma + 1.0) * gk;  // n_{k+1} = [e^E] + 1
        g.push_back(gk);
        if (E < kLog2to62 - 1.0) {
            using boost::multiprecision::cpp_bin_float_50;
            cpp_bin_float_50 x = floor(exp(cpp_bin_float_50(E)));
            n.push_back(ExtCount::of(x.convert_to<std::int64_t>() + 1));
        } else {
            n.push_back(ExtCount::from_log(E + std::log1p(std::exp(-E))));
        }
    }
    return build_flm1(n, g, 0.0);
}

// ---- convex indicators ----------------------------------------------------------------

ConvexSamples ConvexSamples::from_x(const std::vector<double>& x, const std::vector<double>& h) {
    if (x.size() != h.size()) throw std::invalid_argument("x and h differ in length");
    ConvexSamples s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] < 0)) throw std::invalid_argument("x must be negative");
        if (!(h[i] > 0)) throw std::invalid_argument("h must be positive");
        s.g.push_back(-std::log(-std::expm1(x[i])));
        s.log_h.push_back(std::log(h[i]));
    }
    return s;
}

ConvexIndicators convex_indicators(const ConvexSamples& s, double tail_fraction, double tol) {
    std::size_t n = s.g.size();
    if (n < 32 || s.log_h.size() != n) throw std::invalid_argument("need at least 32 samples");
    for (std::size_t i = 1; i < n; ++i)
        if (!(s.g[i] > s.g[i - 1])) throw std::invalid_argument("samples must approach 0 from below");
    // log(1/|x|) with x = log r
    std::vector<double> X(n);
    for (std::size_t i = 0; i < n; ++i) X[i] = -loglog_inv_r(s.g[i]);
    if (X.back() - X.front() < 3.0 * std::log(10.0)) throw std::invalid_argument("samples must span 3 decades of |x|");

    bool exact_dh = !s.log_dh.empty();
    if (exact_dh && s.log_dh.size() + 1 != n) throw std::invalid_argument("log_dh must have one entry per gap");
    std::vector<LogValue> slope(n - 1);
    std::vector<double> noise(n - 1);  // log of the rounding floor of each slope
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double ldx = log_log_ratio(s.g[i], s.g[i + 1]);
        if (exact_dh) {
            slope[i] = LogValue::from_log(s.log_dh[i] - ldx);
            noise[i] = std::log(16.0 * std::numeric_limits<double>::epsilon()) + slope[i].logmag;
        } else {
            LogValue dh = LogValue::from_log(s.log_h[i + 1]) - LogValue::from_log(s.log_h[i]);
            slope[i] = dh / LogValue::from_log(ldx);
            // h carries relative error ~ eps |log h| through its log
            noise[i] = std::log(16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(s.log_h[i + 1]))) +
                       s.log_h[i + 1] - ldx;
        }
        if (i > 0) {
            LogValue d2 = slope[i] - slope[i - 1];
            double scale = std::max({slope[i].logmag, slope[i - 1].logmag});
            double floor = std::max({std::log(tol) + scale, noise[i], noise[i - 1]});
            if (d2.sign < 0 && d2.logmag > floor) throw std::invalid_argument("samples are not convex");
        }
    }
    ConvexIndicators out;
    out.alpha = out.alpha_prime = std::numeric_limits<double>::infinity();
    out.beta = out.beta_prime = -std::numeric_limits<double>::infinity();
    std::size_t start = static_cast<std::size_t>(std::floor(tail_fraction * static_cast<double>(n)));
    for (std::size_t i = start; i < n; ++i) {
        if (!(X[i] > 0)) continue;
        double v = s.log_h[i] / X[i];
        out.alpha = std::min(out.alpha, v);
        out.beta = std::max(out.beta, v);
        if (i + 1 < n && slope[i].sign > 0) {
            double d = slope[i].logmag / X[i];
            out.alpha_prime = std::min(out.alpha_prime, d);
            out.beta_prime = std::max(out.beta_prime, d);
        }
    }
    return out;
}

}  // namespace dg
