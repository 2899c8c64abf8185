#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "fgj/common.hpp"
#include "fgj/quadrature.hpp"

namespace fgj {

struct Band {
    double lo = 0.0;
    double hi = 0.0;
    double mid() const { return 0.5 * (lo + hi); }
    double half() const { return 0.5 * (hi - lo); }
};

// ---------------------------------------------------------------------------
// GapSet: a finite union of disjoint closed bands [lo_j, hi_j], strictly
// increasing.  num_gaps() bands minus one.
// ---------------------------------------------------------------------------
class GapSet {
  public:
    static GapSet make(std::vector<Band> bands) {
        if (bands.empty()) throw std::invalid_argument("gapset: no bands");
        double lo = bands.front().lo, hi = bands.back().hi;
        double span = hi - lo;
        if (!(span > 0)) throw std::invalid_argument("gapset: degenerate span");
        double prev = -std::numeric_limits<double>::infinity();
        for (const auto& b : bands) {
            if (!(b.lo > prev) || !(b.hi > b.lo))
                throw std::invalid_argument("gapset: edges not strictly increasing");
            if (b.hi - b.lo < 1e-9 * span)
                throw std::invalid_argument("gapset: band narrower than 1e-9 * span");
            prev = b.hi;
        }
        GapSet g;
        g.bands_ = std::move(bands);
        return g;
    }

    const std::vector<Band>& bands() const { return bands_; }
    int num_bands() const { return static_cast<int>(bands_.size()); }
    int num_gaps() const { return num_bands() - 1; }
    double lo() const { return bands_.front().lo; }
    double hi() const { return bands_.back().hi; }
    double span() const { return hi() - lo(); }

    // Gap g sits between band g and band g+1.
    double gap_lo(int g) const { return bands_[g].hi; }
    double gap_hi(int g) const { return bands_[g + 1].lo; }

    bool contains(double x) const {
        for (const auto& b : bands_)
            if (x >= b.lo && x <= b.hi) return true;
        return false;
    }

    std::optional<int> band_of(double x) const {
        for (int j = 0; j < num_bands(); ++j)
            if (x >= bands_[j].lo && x <= bands_[j].hi) return j;
        return std::nullopt;
    }

    // Gap index for x strictly between two bands; nullopt outside the hull or in a band.
    std::optional<int> gap_of(double x) const {
        for (int g = 0; g < num_gaps(); ++g)
            if (x > gap_lo(g) && x < gap_hi(g)) return g;
        return std::nullopt;
    }

    bool is_band_edge(double x) const {
        for (const auto& b : bands_)
            if (x == b.lo || x == b.hi) return true;
        return false;
    }

    std::vector<double> edges() const {
        std::vector<double> e;
        for (const auto& b : bands_) {
            e.push_back(b.lo);
            e.push_back(b.hi);
        }
        return e;
    }

  private:
    std::vector<Band> bands_;
};

/// Euclidean distance from x to the set; 0 iff x belongs to it.
inline double dist_to_set(const GapSet& gs, double x) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& b : gs.bands()) {
        if (x >= b.lo && x <= b.hi) return 0.0;
        d = std::min(d, std::min(std::abs(x - b.lo), std::abs(x - b.hi)));
    }
    return d;
}

/// Distance from a band point x to R \ e (the nearer edge of its band);
/// 0 for x outside the set.
inline double dist_to_boundary(const GapSet& gs, double x) {
    for (const auto& b : gs.bands())
        if (x >= b.lo && x <= b.hi) return std::min(x - b.lo, b.hi - x);
    return 0.0;
}

namespace detail {

// R(x) = prod over all edges (x - e).  abs_skipping: |prod| with one edge left out
// (used where positivity of the reduced polynomial is known analytically).
inline double R_reduced_abs(const std::vector<double>& edges, double x, double skip_edge) {
    double p = 1.0;
    bool skipped = false;
    for (double e : edges) {
        if (!skipped && e == skip_edge) {
            skipped = true;
            continue;
        }
        p *= (x - e);
    }
    return std::abs(p);
}

// |R(x)| / ((x - lo_j)(hi_j - x)) on band j; positive on the closed band.
inline double band_rest(const GapSet& gs, int j, double x) {
    double p = 1.0;
    for (int k = 0; k < gs.num_bands(); ++k) {
        if (k == j) continue;
        p *= (x - gs.bands()[k].lo) * (x - gs.bands()[k].hi);
    }
    return std::abs(p);
}

// sqrt(R(z)) with branch cuts exactly on the bands and ~ z^{l+1} at infinity.
// Per band, sqrt(z - lo) * sqrt(z - hi) (principal square roots) has its cut
// only on [lo, hi]; the product keeps the real positive branch on (hi_max, inf).
inline complex sqrtR(const GapSet& gs, complex z) {
    complex w = 1.0;
    for (const auto& b : gs.bands()) w *= std::sqrt(z - b.lo) * std::sqrt(z - b.hi);
    return w;
}

inline double poly_eval(const std::vector<double>& monic_low_coeffs, double x) {
    // monic of degree n with low coefficients c[0..n-1]
    double v = 1.0;
    for (int k = static_cast<int>(monic_low_coeffs.size()) - 1; k >= 0; --k)
        v = v * x + monic_low_coeffs[k];
    return v;
}

inline complex poly_eval(const std::vector<double>& monic_low_coeffs, complex x) {
    complex v = 1.0;
    for (int k = static_cast<int>(monic_low_coeffs.size()) - 1; k >= 0; --k)
        v = v * x + monic_low_coeffs[k];
    return v;
}

// Solve a small dense linear system by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> rhs) {
    const int n = static_cast<int>(rhs.size());
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        if (A[piv][c] == 0.0) throw numeric_error("equilibrium: singular moment system");
        std::swap(A[piv], A[c]);
        std::swap(rhs[piv], rhs[c]);
        for (int r = c + 1; r < n; ++r) {
            double f = A[r][c] / A[c][c];
            for (int k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            rhs[r] -= f * rhs[c];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = rhs[r];
        for (int k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
        x[r] = s / A[r][r];
    }
    return x;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// EquilibriumData: the equilibrium measure of a gap set.  The density is
// |Q(x)| / (pi sqrt(|R(x)|)) with R the monic edge polynomial and Q monic of
// degree num_gaps, one root per gap, fixed by the vanishing of
// int_gap Q/sqrt(R).  Capacity from the log-x asymptotics of the Green's
// function.  All fields immutable after solve_equilibrium.
// ---------------------------------------------------------------------------
struct EquilibriumData {
    GapSet set;
    std::vector<double> q_coeffs;    // low coefficients of monic Q (size = num_gaps)
    std::vector<double> gap_zeros;   // one root of Q per gap
    double log_capacity = 0.0;
    std::vector<double> band_weights;  // harmonic measure of each band
    double quad_tol = 1e-10;

    // Cumulative equilibrium mass per band, tabulated in the cosine variable
    // (theta = 0 at the right band edge).  Used for the boundary phase of the
    // complex Green's function.
    struct PhaseTable {
        std::vector<double> cum;  // partial masses at panel boundaries
        int panels = 0;
    };
    std::vector<PhaseTable> phase_tables;
    std::vector<double> mass_right;  // total mass strictly right of band j

    double capacity() const { return std::exp(log_capacity); }
    double Q(double x) const { return detail::poly_eval(q_coeffs, x); }
    complex Q(complex x) const { return detail::poly_eval(q_coeffs, x); }
};

namespace detail {

// density in the cosine variable on band j (d rho = dens_theta(theta) dtheta)
inline double dens_theta(const EquilibriumData& eq, int j, double theta) {
    const Band& b = eq.set.bands()[j];
    double x = b.mid() + b.half() * std::cos(theta);
    return std::abs(eq.Q(x)) / (pi * std::sqrt(band_rest(eq.set, j, x)));
}

// int over [0, sqrt(|x-edge|)] of 2 |Q| / sqrt(|R|/(t-edge)) ds with t = edge +- s^2;
// equals G contribution from the edge toward x (single sign region).
inline double edge_integral(const EquilibriumData& eq, double edge, double x, double tol) {
    const double sgn = (x >= edge) ? 1.0 : -1.0;
    const double smax = std::sqrt(std::abs(x - edge));
    if (smax == 0.0) return 0.0;
    auto edges = eq.set.edges();
    auto f = [&](double s) {
        double t = edge + sgn * s * s;
        double rr = R_reduced_abs(edges, t, edge);
        return 2.0 * std::abs(eq.Q(t)) / std::sqrt(rr);
    };
    auto r = adaptive_integrate<double>(f, 0.0, smax, tol);
    if (!r.converged)
        throw quadrature_error("green: edge integral did not converge, best=" + fmt17(r.value));
    return r.value;
}

// int_X^Y (|Q|/sqrt(R) - 1/t) dt on an exterior ray via u = 1/|t|.  Written
// with the reversed polynomials revQ(v) = v^l Q(1/v), revR(v) = v^{2l+2} R(1/v)
// so the cancellation at u -> 0 happens between O(1) quantities.  Y = +inf ok.
// side = +1 for the right ray (t = 1/u), -1 for the left (t = -1/u).
inline double exterior_tail_ray(const EquilibriumData& eq, double X, double Y, double tol,
                                int side) {
    const auto edges = eq.set.edges();
    auto phi = [&](double v) {
        double qn = 1.0;  // revQ(v)
        for (double c : eq.gap_zeros) qn *= (1.0 - c * v);
        double rn = 1.0;  // revR(v)
        for (double e : edges) rn *= (1.0 - e * v);
        return qn / std::sqrt(rn);
    };
    auto f = [&](double u) { return (phi(side * u) - 1.0) / u; };
    double ulo = std::isinf(Y) ? 0.0 : 1.0 / Y;
    auto r = adaptive_integrate<double>(f, ulo, 1.0 / X, tol);
    if (!r.converged) throw quadrature_error("green: exterior tail integral did not converge");
    return r.value;
}

// Switch-over points for the asymptotic form of G; chosen so the reversed
// polynomials above stay away from their zeros (|edge| * u < 1/2).
inline double anchor_right(const GapSet& gs) {
    double m = std::max(std::abs(gs.lo()), std::abs(gs.hi()));
    return std::max(gs.hi() + 2.0 * gs.span(), 2.0 * m);
}
inline double anchor_left(const GapSet& gs) {
    double m = std::max(std::abs(gs.lo()), std::abs(gs.hi()));
    return std::min(gs.lo() - 2.0 * gs.span(), -2.0 * m);
}

}  // namespace detail

enum class Measure { lebesgue, equilibrium };

// A quadrature node on a band.  dist_lo/dist_hi are the distances to the band
// edges carried in exact arithmetic from the cosine substitution; x alone
// cannot resolve distances below ~1e-16 |edge|, which matters for the
// edge-singular weights.
struct BandPoint {
    double x = 0.0;
    double dist_lo = 0.0, dist_hi = 0.0;
    int band = 0;
};

// ---------------------------------------------------------------------------
// band_integral_pt: adaptive integral over the whole set, per-band cosine
// substitution x = mid + half*cos(theta).  The substitution absorbs the
// inverse-square-root endpoint behavior of the equilibrium density and
// Szego-type weights; log singularities remain log singularities in theta,
// handled by a geometric edge grading (the error estimator alone is blind to
// them).  The integrand receives a BandPoint.
// ---------------------------------------------------------------------------
template <typename T = double, typename F>
quad_result<T> band_integral_pt(const EquilibriumData& eq, F&& f, Measure measure, double tol,
                                double edge_exclusion = 0.0, int grade_levels = 48) {
    quad_result<T> total;
    total.converged = true;
    const int nb = eq.set.num_bands();
    for (int j = 0; j < nb; ++j) {
        const Band& b = eq.set.bands()[j];
        double th_lo = 0.0, th_hi = pi;
        if (edge_exclusion > 0.0) {
            if (edge_exclusion >= b.half()) continue;
            double c = 1.0 - edge_exclusion / b.half();
            th_lo = std::acos(c);
            th_hi = pi - th_lo;
        }
        auto g = [&](double theta) -> T {
            BandPoint pt;
            pt.band = j;
            double s = std::sin(0.5 * theta), c = std::cos(0.5 * theta);
            pt.dist_hi = 2.0 * b.half() * s * s;  // hi - x, exact for small theta
            pt.dist_lo = 2.0 * b.half() * c * c;  // x - lo
            pt.x = b.mid() + b.half() * std::cos(theta);
            if (pt.x >= b.hi) pt.x = std::nextafter(b.hi, b.lo);
            if (pt.x <= b.lo) pt.x = std::nextafter(b.lo, b.hi);
            if (measure == Measure::lebesgue)
                return T(f(pt)) * (b.half() * std::sin(theta));
            return T(f(pt)) * detail::dens_theta(eq, j, theta);
        };
        std::vector<double> breaks;
        if (edge_exclusion == 0.0) {
            for (int k = 2; k <= grade_levels; ++k) {
                breaks.push_back(pi / double(1ull << k));
                breaks.push_back(pi - pi / double(1ull << k));
            }
        }
        auto r = adaptive_integrate<T>(g, th_lo, th_hi, tol / nb, 1e-13, 40000, breaks);
        total.value += r.value;
        total.error += r.error;
        total.panels += r.panels;
        total.converged = total.converged && r.converged;
    }
    return total;
}

/// band_integral over plain f(x); see band_integral_pt for the edge-aware form.
template <typename T = double, typename F>
quad_result<T> band_integral(const EquilibriumData& eq, F&& f, Measure measure, double tol,
                             double edge_exclusion = 0.0, int grade_levels = 48) {
    return band_integral_pt<T>(
        eq, [&](const BandPoint& pt) { return f(pt.x); }, measure, tol, edge_exclusion,
        grade_levels);
}

// ---------------------------------------------------------------------------
// solve_equilibrium: gap zeros from the l x l moment system, capacity from the
// exact large-x limit of the Green's function, band weights by quadrature.
// ---------------------------------------------------------------------------
inline EquilibriumData solve_equilibrium(const GapSet& gs, double tol = 1e-10) {
    if (!(tol > 0)) throw std::invalid_argument("equilibrium: tol must be positive");
    EquilibriumData eq;
    eq.set = gs;
    eq.quad_tol = tol;
    const int l = gs.num_gaps();
    const double mtol = std::min(tol * 1e-2, 1e-12);

    // Moments over gap g of t^k / sqrt(R), via the cosine substitution.
    auto edges = gs.edges();
    auto gap_moment = [&](int g, int k) {
        double lo = gs.gap_lo(g), hi = gs.gap_hi(g);
        double m = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        auto f = [&](double theta) {
            double t = m + h * std::cos(theta);
            double rest = 1.0;
            for (double e : edges)
                if (e != lo && e != hi) rest *= (t - e);
            double v = 1.0;
            for (int i = 0; i < k; ++i) v *= t;
            return v / std::sqrt(std::abs(rest));
        };
        auto r = adaptive_integrate<double>(f, 0.0, pi, mtol);
        if (!r.converged) throw quadrature_error("equilibrium: gap moment did not converge");
        return r.value;
    };

    if (l > 0) {
        std::vector<std::vector<double>> A(l, std::vector<double>(l));
        std::vector<double> rhs(l);
        for (int g = 0; g < l; ++g) {
            for (int k = 0; k < l; ++k) A[g][k] = gap_moment(g, k);
            rhs[g] = -gap_moment(g, l);
        }
        eq.q_coeffs = detail::solve_dense(std::move(A), std::move(rhs));

        // One root of Q per gap, isolated by bisection.
        for (int g = 0; g < l; ++g) {
            double a = gs.gap_lo(g), b = gs.gap_hi(g);
            double fa = eq.Q(a), fb = eq.Q(b);
            if (fa == 0.0 || fb == 0.0 || (fa > 0) == (fb > 0))
                throw consistency_error("equilibrium: gap " + std::to_string(g) +
                                        " does not contain exactly one zero of Q");
            for (int it = 0; it < 200 && b - a > 1e-16 * gs.span(); ++it) {
                double m = 0.5 * (a + b);
                double fm = eq.Q(m);
                if (fm == 0.0) {
                    a = b = m;
                    break;
                }
                ((fm > 0) == (fa > 0)) ? (a = m, fa = fm) : (b = m, fb = fm);
            }
            eq.gap_zeros.push_back(0.5 * (a + b));
        }
    }

    // Capacity: log cap = log X - G(X) - int_X^inf (Q/sqrt(R) - 1/t) dt.
    {
        double X = detail::anchor_right(gs);
        double GX = detail::edge_integral(eq, gs.hi(), X, mtol);
        eq.log_capacity = std::log(X) - GX - detail::exterior_tail_ray(
            eq, X, std::numeric_limits<double>::infinity(), mtol, +1);
    }

    // Band weights and per-band phase tables.
    const int K = 64;
    for (int j = 0; j < gs.num_bands(); ++j) {
        EquilibriumData::PhaseTable pt;
        pt.panels = K;
        pt.cum.assign(K + 1, 0.0);
        double acc = 0.0;
        for (int k = 0; k < K; ++k) {
            double a = pi * k / K, b = pi * (k + 1) / K;
            acc += detail::gauss_panel<25, double>(
                [&](double th) { return detail::dens_theta(eq, j, th); }, a, b);
            pt.cum[k + 1] = acc;
        }
        eq.band_weights.push_back(acc);
        eq.phase_tables.push_back(std::move(pt));
    }
    eq.mass_right.assign(gs.num_bands(), 0.0);
    for (int j = gs.num_bands() - 2; j >= 0; --j)
        eq.mass_right[j] = eq.mass_right[j + 1] + eq.band_weights[j + 1];

    double mass = 0.0;
    for (double w : eq.band_weights) {
        if (!(w > 0)) throw consistency_error("equilibrium: nonpositive band weight");
        mass += w;
    }
    if (std::abs(mass - 1.0) > tol)
        throw consistency_error("equilibrium: band weights sum to " + fmt17(mass));
    return eq;
}

/// d rho / dx at a band-interior point.
inline double equilibrium_density(const EquilibriumData& eq, double x) {
    auto j = eq.set.band_of(x);
    if (!j || eq.set.is_band_edge(x))
        throw std::domain_error("equilibrium_density: x not in a band interior");
    const Band& b = eq.set.bands()[*j];
    double r = (x - b.lo) * (b.hi - x) * detail::band_rest(eq.set, *j, x);
    return std::abs(eq.Q(x)) / (pi * std::sqrt(r));
}

/// Edge-stable variant for quadrature nodes.
inline double equilibrium_density(const EquilibriumData& eq, const BandPoint& pt) {
    double r = pt.dist_lo * pt.dist_hi * detail::band_rest(eq.set, pt.band, pt.x);
    return std::abs(eq.Q(pt.x)) / (pi * std::sqrt(r));
}

// ---------------------------------------------------------------------------
// green_function: the potential theoretic Green's function with pole at
// infinity.  Zero on the set; in a gap, integrate |Q|/sqrt(R) from the band
// edge on the same side of the gap zero as x (the vanishing condition makes
// the two edge integrals agree); on the exterior rays, switch to the
// asymptotic form log|x| - log cap + exact tail correction beyond 2 spans.
// ---------------------------------------------------------------------------
inline double green_function(const EquilibriumData& eq, double x) {
    const GapSet& gs = eq.set;
    if (gs.contains(x)) return 0.0;
    const double tol = std::min(eq.quad_tol * 1e-2, 1e-12);
    if (auto g = gs.gap_of(x)) {
        double c = eq.gap_zeros[*g];
        double edge = (x <= c) ? gs.gap_lo(*g) : gs.gap_hi(*g);
        return detail::edge_integral(eq, edge, x, tol);
    }
    if (x > gs.hi()) {
        double X = detail::anchor_right(gs);
        if (x <= X) return detail::edge_integral(eq, gs.hi(), x, tol);
        double GX = detail::edge_integral(eq, gs.hi(), X, tol);
        return GX + std::log(x / X) + detail::exterior_tail_ray(eq, X, x, tol, +1);
    }
    // x < lo()
    double X = detail::anchor_left(gs);
    if (x >= X) return detail::edge_integral(eq, gs.lo(), x, tol);
    double GX = detail::edge_integral(eq, gs.lo(), X, tol);
    return GX + std::log(x / X) + detail::exterior_tail_ray(eq, -X, -x, tol, -1);
}

/// Boundary phase on the set: pi times the equilibrium mass strictly to the
/// right of x.  (The harmonic conjugate of G at x + i0, normalized to vanish
/// at +infinity.)
inline double green_phase(const EquilibriumData& eq, double x) {
    auto j = eq.set.band_of(x);
    if (!j) {
        // constant on each gap / exterior component
        if (x > eq.set.hi()) return 0.0;
        if (x < eq.set.lo()) return pi;
        auto g = eq.set.gap_of(x);
        return pi * eq.mass_right[*g];  // gap g: right of it start at band g+1
    }
    const Band& b = eq.set.bands()[*j];
    if (eq.set.is_band_edge(x))
        return pi * (x == b.hi ? eq.mass_right[*j]
                               : eq.mass_right[*j] + eq.band_weights[*j]);
    double c = std::clamp((x - b.mid()) / b.half(), -1.0, 1.0);
    double theta = std::acos(c);
    const auto& pt = eq.phase_tables[*j];
    double step = pi / pt.panels;
    int k = std::min(static_cast<int>(theta / step), pt.panels - 1);
    double partial = pt.cum[k] + detail::gauss_panel<20, double>(
        [&](double th) { return detail::dens_theta(eq, *j, th); }, step * k, theta);
    return pi * (eq.mass_right[*j] + partial);
}

// ---------------------------------------------------------------------------
// complex_green: G + i*Ghat.  Off the real axis, integrate Q/sqrt(R) along a
// segment from a real anchor right of the set (where the value is known and
// real); the sqrt(R) branch is single valued off the bands so no tracking is
// needed.  On the set (boundary tag) the real part is 0 and the phase comes
// from green_phase.
// ---------------------------------------------------------------------------
inline complex complex_green(const EquilibriumData& eq, const energy& en) {
    const GapSet& gs = eq.set;
    complex z = en.value();
    if (z.imag() == 0.0 && gs.is_band_edge(z.real()))
        throw std::domain_error("complex_green: band edge");
    if (z.imag() == 0.0) {
        double x = z.real();
        if (en.is_boundary() || !gs.contains(x))
            return complex(green_function(eq, x), green_phase(eq, x));
        throw std::domain_error("complex_green: band-interior x needs the +i0 boundary tag");
    }
    // anchor on the right exterior ray, two spans out
    double X0 = gs.hi() + 2.0 * gs.span();
    double G0 = green_function(eq, X0);
    auto f = [&](double s) {  // parametrize the straight segment X0 -> z
        complex t = complex(X0, 0.0) + s * (z - complex(X0, 0.0));
        return eq.Q(t) / detail::sqrtR(gs, t) * (z - complex(X0, 0.0));
    };
    auto r = adaptive_integrate<complex>(f, 0.0, 1.0, std::min(eq.quad_tol * 1e-2, 1e-12));
    if (!r.converged) throw quadrature_error("complex_green: path integral did not converge");
    return complex(G0, 0.0) + r.value;
}

/// Band-interior grid with a relative edge standoff (default 1e-3 of the band
/// width), pts per band.
inline std::vector<double> make_band_grid(const GapSet& gs, int pts_per_band,
                                          double margin_frac = 1e-3) {
    std::vector<double> g;
    for (const auto& b : gs.bands()) {
        double m = margin_frac * (b.hi - b.lo);
        for (int i = 0; i < pts_per_band; ++i) {
            double t = (pts_per_band == 1) ? 0.5 : double(i) / (pts_per_band - 1);
            g.push_back(b.lo + m + t * (b.hi - b.lo - 2 * m));
        }
    }
    return g;
}

}  // namespace fgj
