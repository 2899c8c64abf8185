#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "fgj/common.hpp"
#include "fgj/gapset.hpp"
#include "fgj/tridiag.hpp"

namespace fgj {

namespace detail {

// --- small dense polynomial helpers (ascending coefficients) ---------------
using poly = std::vector<double>;

inline poly poly_add(const poly& u, const poly& v) {
    poly r(std::max(u.size(), v.size()), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) r[i] += u[i];
    for (std::size_t i = 0; i < v.size(); ++i) r[i] += v[i];
    return r;
}

inline poly poly_mul(const poly& u, const poly& v) {
    if (u.empty() || v.empty()) return {};
    poly r(u.size() + v.size() - 1, 0.0);
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) r[i + j] += u[i] * v[j];
    return r;
}

inline poly poly_deriv(const poly& u) {
    if (u.size() <= 1) return {};
    poly r(u.size() - 1);
    for (std::size_t i = 1; i < u.size(); ++i) r[i - 1] = u[i] * double(i);
    return r;
}

template <typename T>
T poly_val(const poly& u, T x) {
    T v{};
    for (int i = static_cast<int>(u.size()) - 1; i >= 0; --i) v = v * x + u[i];
    return v;
}

// All roots (with multiplicity) of a polynomial known to have only real
// roots, by recursive bracketing at the critical points.  Double roots show
// up as sign-definite touches at critical points (closed spectral gaps).
inline std::vector<double> real_rooted_roots(const poly& c0) {
    poly c = c0;
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    int deg = static_cast<int>(c.size()) - 1;
    if (deg <= 0) return {};
    if (deg == 1) return {-c[0] / c[1]};

    double lead = c.back();
    double bound = 0.0;
    for (int i = 0; i < deg; ++i) bound = std::max(bound, std::abs(c[i] / lead));
    bound += 1.0;

    std::vector<double> crit = real_rooted_roots(poly_deriv(c));
    std::vector<double> pts;
    pts.push_back(-bound);
    for (double t : crit)
        if (t > -bound && t < bound) pts.push_back(t);
    pts.push_back(bound);
    std::sort(pts.begin(), pts.end());

    std::vector<double> roots;
    double scale = 0.0;
    for (double ci : c) scale = std::max(scale, std::abs(ci));
    auto f = [&](double x) { return poly_val(c, x); };

    std::vector<bool> crossed(pts.size() - 1, false);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double a = pts[i], b = pts[i + 1], fa = f(a), fb = f(b);
        if ((fa > 0) != (fb > 0)) {
            crossed[i] = true;
            for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
                double m = 0.5 * (a + b);
                double fm = f(m);
                if (fm == 0.0) {
                    a = b = m;
                    break;
                }
                ((fm > 0) == (fa > 0)) ? (a = m, fa = fm) : (b = m, fb = fm);
            }
            roots.push_back(0.5 * (a + b));
        }
    }
    // touching double roots at interior critical points
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        double t = pts[i];
        if (crossed[i - 1] || crossed[i]) continue;
        double tol = 1e-10 * scale * std::pow(1.0 + std::abs(t), deg);
        if (std::abs(f(t)) <= tol) {
            roots.push_back(t);
            roots.push_back(t);
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace detail

struct PointMass {
    double x = 0.0;
    double mu = 0.0;
};

// ---------------------------------------------------------------------------
// PeriodicBackground: a period-p two-sided Jacobi operator given by one
// period block.  The discriminant (trace of the one-period transfer matrix)
// is cached as a polynomial; its preimage of [-2,2] is cached as a GapSet.
// Construction validates the capacity identity (a_1...a_p)^{1/p} = cap(bands).
// ---------------------------------------------------------------------------
class PeriodicBackground {
    struct Impl {
        int p = 1;
        std::vector<double> a, b;  // period block, 0-based
        detail::poly disc;
        GapSet bands;
        double log_geo_mean_a = 0.0;
        // factored form of disc^2 - 4 = scale * prod (x - r_i); exact closed-form
        // roots for p <= 2, where squaring the trace would lose half the digits
        // near band edges
        bool disc2_factored = false;
        std::vector<double> disc2_roots;
        double disc2_scale = 1.0;
    };
    std::shared_ptr<const Impl> impl_;

  public:
    static PeriodicBackground make(std::vector<double> a, std::vector<double> b) {
        if (a.empty() || a.size() != b.size())
            throw std::invalid_argument("background: period block size mismatch");
        for (double an : a)
            if (!(an > 0)) throw std::invalid_argument("background: a_n <= 0");
        auto impl = std::make_shared<Impl>();
        impl->p = static_cast<int>(a.size());
        impl->a = std::move(a);
        impl->b = std::move(b);

        // one-period transfer matrix as a 2x2 polynomial matrix, phase 0
        using detail::poly;
        poly t11{1.0}, t12{}, t21{}, t22{1.0};
        const int p = impl->p;
        for (int n = 1; n <= p; ++n) {
            double an = impl->a[n - 1];
            double am = impl->a[(n - 2 + p) % p];  // a_{n-1}, cyclic
            double bn = impl->b[n - 1];
            poly s11{-bn / an, 1.0 / an}, s12{-am / an};
            poly n11 = detail::poly_add(detail::poly_mul(s11, t11), detail::poly_mul(s12, t21));
            poly n12 = detail::poly_add(detail::poly_mul(s11, t12), detail::poly_mul(s12, t22));
            t21 = t11;
            t22 = t12;
            t11 = std::move(n11);
            t12 = std::move(n12);
        }
        impl->disc = detail::poly_add(t11, t22);

        // factored disc^2 - 4 with closed-form roots for p <= 2; squaring the
        // trace loses half the digits near band edges
        if (p == 1) {
            double a1 = impl->a[0], b1 = impl->b[0];
            impl->disc2_factored = true;
            impl->disc2_roots = {b1 - 2 * a1, b1 + 2 * a1};
            impl->disc2_scale = 1.0 / (a1 * a1);
        } else if (p == 2) {
            double a1 = impl->a[0], a2 = impl->a[1], b1 = impl->b[0], b2 = impl->b[1];
            impl->disc2_factored = true;
            impl->disc2_scale = 1.0 / (a1 * a1 * a2 * a2);
            for (double c : {a1 + a2, a1 - a2}) {
                // roots of (x - b1)(x - b2) = c^2, stable quadratic formula
                double s = b1 + b2, q = b1 * b2 - c * c;
                double d = std::sqrt(std::max(0.0, s * s - 4.0 * q));
                double r1 = 0.5 * (s + (s >= 0 ? d : -d));
                double r2 = (r1 != 0.0) ? q / r1 : 0.5 * (s - (s >= 0 ? d : -d));
                impl->disc2_roots.push_back(r1);
                impl->disc2_roots.push_back(r2);
            }
            std::sort(impl->disc2_roots.begin(), impl->disc2_roots.end());
        }

        // band edges: the factored roots where exact, else roots of disc -+ 2
        std::vector<double> e;
        if (impl->disc2_factored) {
            e = impl->disc2_roots;
        } else {
            poly dm = impl->disc, dp = impl->disc;
            dm[0] -= 2.0;
            dp[0] += 2.0;
            e = detail::real_rooted_roots(dm);
            auto rp = detail::real_rooted_roots(dp);
            e.insert(e.end(), rp.begin(), rp.end());
            std::sort(e.begin(), e.end());
        }
        if (static_cast<int>(e.size()) != 2 * p)
            throw numeric_error("background: discriminant root count " +
                                std::to_string(e.size()) + " != " + std::to_string(2 * p));
        double span = e.back() - e.front();
        std::vector<Band> bands;
        bands.push_back({e[0], e[1]});
        for (int i = 1; i < p; ++i) {
            if (e[2 * i] - bands.back().hi <= 1e-9 * span)
                bands.back().hi = e[2 * i + 1];
            else
                bands.push_back({e[2 * i], e[2 * i + 1]});
        }
        impl->bands = GapSet::make(std::move(bands));

        double lg = 0.0;
        for (double an : impl->a) lg += std::log(an);
        impl->log_geo_mean_a = lg / p;
        auto eq = solve_equilibrium(impl->bands, 1e-10);
        if (std::abs(impl->log_geo_mean_a - eq.log_capacity) > 1e-9)
            throw consistency_error("background: geometric mean of a differs from capacity by " +
                                    fmt17(impl->log_geo_mean_a - eq.log_capacity));
        PeriodicBackground bg;
        bg.impl_ = std::move(impl);
        return bg;
    }

    static PeriodicBackground free() { return make({1.0}, {0.0}); }

    int period() const { return impl_->p; }
    /// cyclic accessor; k is any integer offset into the period block
    double a_cyc(long long k) const {
        int p = impl_->p;
        return impl_->a[static_cast<int>(((k % p) + p) % p)];
    }
    double b_cyc(long long k) const {
        int p = impl_->p;
        return impl_->b[static_cast<int>(((k % p) + p) % p)];
    }
    const std::vector<double>& block_a() const { return impl_->a; }
    const std::vector<double>& block_b() const { return impl_->b; }
    const GapSet& bands() const { return impl_->bands; }
    double log_geo_mean_a() const { return impl_->log_geo_mean_a; }

    template <typename T>
    T discriminant(T x) const {
        return detail::poly_val(impl_->disc, x);
    }

    /// disc(x)^2 - 4, in factored form where available (cancellation-free at edges)
    template <typename T>
    T disc2_minus4(T x) const {
        if (impl_->disc2_factored) {
            T prod(impl_->disc2_scale);
            for (double r : impl_->disc2_roots) prod *= (x - r);
            return prod;
        }
        T d = discriminant(x);
        return d * d - 4.0;
    }

    /// Same, but with the distances to the enclosing band's edges supplied
    /// exactly (quadrature nodes hugging an edge).
    double disc2_minus4_stable(const BandPoint& pt) const {
        auto jb = impl_->bands.band_of(pt.x);
        if (!impl_->disc2_factored || !jb) return disc2_minus4(pt.x);
        const Band& b = impl_->bands.bands()[*jb];
        double prod = impl_->disc2_scale;
        bool used_lo = false, used_hi = false;
        for (double r : impl_->disc2_roots) {
            if (!used_lo && r == b.lo) {
                prod *= pt.dist_lo;
                used_lo = true;
            } else if (!used_hi && r == b.hi) {
                prod *= -pt.dist_hi;
                used_hi = true;
            } else {
                prod *= (pt.x - r);
            }
        }
        return prod;
    }

    friend bool same_background(const PeriodicBackground& x, const PeriodicBackground& y) {
        return x.impl_ == y.impl_ ||
               (x.impl_->a == y.impl_->a && x.impl_->b == y.impl_->b);
    }
};

/// b = 0, a alternating ((beta+alpha)/2, (beta-alpha)/2):
/// bands [-beta,-alpha] u [alpha,beta].
inline PeriodicBackground period2_from_bands(double alpha, double beta) {
    if (!(0 < alpha && alpha < beta))
        throw std::invalid_argument("period2_from_bands: need 0 < alpha < beta");
    return PeriodicBackground::make({0.5 * (beta + alpha), 0.5 * (beta - alpha)}, {0.0, 0.0});
}

/// The spectrum of a periodic background: discriminant preimage of [-2,2].
inline const GapSet& discriminant_bands(const PeriodicBackground& bg) { return bg.bands(); }

// ---------------------------------------------------------------------------
// JacobiCoeffs: half-line Jacobi operator, finite head then an exactly
// periodic tail with a phase.  a(n), b(n) are total for n >= 1.
// ---------------------------------------------------------------------------
class JacobiCoeffs {
  public:
    static JacobiCoeffs make(std::vector<double> head_a, std::vector<double> head_b,
                             PeriodicBackground tail, int phase = 0) {
        if (head_a.size() != head_b.size())
            throw std::invalid_argument("jacobi: head length mismatch");
        for (double a : head_a)
            if (!(a > 0)) throw std::invalid_argument("jacobi: head a_n <= 0");
        if (phase < 0 || phase >= tail.period())
            throw std::invalid_argument("jacobi: phase out of range");
        JacobiCoeffs j;
        j.head_a_ = std::move(head_a);
        j.head_b_ = std::move(head_b);
        j.tail_ = std::move(tail);
        j.phase_ = phase;
        return j;
    }

    int head_len() const { return static_cast<int>(head_a_.size()); }

    double a(int n) const {  // n >= 1
        int N = head_len();
        return n <= N ? head_a_[n - 1] : tail_.a_cyc(phase_ + (n - N) - 1);
    }
    double b(int n) const {
        int N = head_len();
        return n <= N ? head_b_[n - 1] : tail_.b_cyc(phase_ + (n - N) - 1);
    }

    const PeriodicBackground& tail() const { return tail_; }
    int phase() const { return phase_; }
    const std::vector<double>& head_a() const { return head_a_; }
    const std::vector<double>& head_b() const { return head_b_; }

    double norm_bound() const {
        double m = 0.0;
        for (int i = 0; i < head_len(); ++i)
            m = std::max(m, std::abs(head_b_[i]) + 2.0 * head_a_[i]);
        for (int i = 0; i < tail_.period(); ++i)
            m = std::max(m, std::abs(tail_.block_b()[i]) + 2.0 * tail_.block_a()[i]);
        return m;
    }

  private:
    std::vector<double> head_a_, head_b_;
    PeriodicBackground tail_{PeriodicBackground::free()};
    int phase_ = 0;
};

inline JacobiCoeffs build_eventually_periodic(std::vector<double> head_a,
                                              std::vector<double> head_b,
                                              PeriodicBackground tail, int phase = 0) {
    return JacobiCoeffs::make(std::move(head_a), std::move(head_b), std::move(tail), phase);
}

inline JacobiCoeffs free_jacobi() {
    return JacobiCoeffs::make({}, {}, PeriodicBackground::free());
}

/// n-times stripped operator: a_k -> a_{k+n}, b_k -> b_{k+n}.
inline JacobiCoeffs strip(const JacobiCoeffs& J, int n) {
    if (n < 0) throw std::invalid_argument("strip: n < 0");
    if (n == 0) return J;
    int N = J.head_len();
    if (n <= N) {
        std::vector<double> a(J.head_a().begin() + n, J.head_a().end());
        std::vector<double> b(J.head_b().begin() + n, J.head_b().end());
        return JacobiCoeffs::make(std::move(a), std::move(b), J.tail(), J.phase());
    }
    int ph = (J.phase() + (n - N)) % J.tail().period();
    return JacobiCoeffs::make({}, {}, J.tail(), ph);
}

/// Leading N x N section.
inline TruncatedOperator truncate(const JacobiCoeffs& J, int N) {
    std::vector<double> d(N), o(N - 1);
    for (int i = 0; i < N; ++i) d[i] = J.b(i + 1);
    for (int i = 0; i + 1 < N; ++i) o[i] = J.a(i + 1);
    return TruncatedOperator::make(std::move(d), std::move(o));
}

// ---------------------------------------------------------------------------
// Orthonormal polynomials: p_0 = 1 and
//   x p_n = a_{n+1} p_{n+1} + b_{n+1} p_n + a_n p_{n-1}.
// The scaled variant survives the exp(n G) growth off the spectrum.
// ---------------------------------------------------------------------------
template <typename T>
std::vector<T> opoly_eval(const JacobiCoeffs& J, int n, T x) {
    std::vector<T> p(n + 1);
    p[0] = T(1);
    if (n >= 1) p[1] = (x - J.b(1)) / J.a(1);
    for (int k = 1; k < n; ++k)
        p[k + 1] = ((x - J.b(k + 1)) * p[k] - J.a(k) * p[k - 1]) / J.a(k + 1);
    return p;
}

template <typename T>
std::vector<scaled<T>> opoly_eval_scaled(const JacobiCoeffs& J, int n, T x) {
    std::vector<scaled<T>> p(n + 1);
    p[0] = {T(1), 0.0};
    if (n >= 1) p[1] = {(x - J.b(1)) / J.a(1), 0.0};
    for (int k = 1; k < n; ++k) {
        T prev = p[k - 1].v * std::exp(p[k - 1].lg - p[k].lg);
        scaled<T> next{((x - J.b(k + 1)) * p[k].v - J.a(k) * prev) / J.a(k + 1), p[k].lg};
        double m = std::abs(next.v);
        if (m > 1e100) {
            next.v /= m;
            next.lg += std::log(m);
        }
        p[k + 1] = next;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Floquet data of the periodic tail.  The one-period transfer matrix (over a
// pure period of the two-sided extension, a_0 = a_cyc(phase-1)) has
// det = 1 and trace = discriminant; the returned eigenvector is
// (psi_1, psi_0) of the decaying two-sided-tail solution.  Branch selection
// is pointwise: |lambda| < 1 off the real axis and in gaps, and the Herglotz
// sign test Im m > 0 at x + i0 on band interiors (never continuity tracking).
// ---------------------------------------------------------------------------
namespace detail {

struct transfer2 {
    complex t11, t12, t21, t22;
};

inline transfer2 period_transfer(const PeriodicBackground& bg, int phase, complex x) {
    transfer2 T{1.0, 0.0, 0.0, 1.0};
    for (int n = 1; n <= bg.period(); ++n) {
        double an = bg.a_cyc(phase + n - 1);
        double am = bg.a_cyc(phase + n - 2);
        double bn = bg.b_cyc(phase + n - 1);
        complex s11 = (x - bn) / an;
        complex s12 = -am / an;
        transfer2 N;
        N.t11 = s11 * T.t11 + s12 * T.t21;
        N.t12 = s11 * T.t12 + s12 * T.t22;
        N.t21 = T.t11;
        N.t22 = T.t12;
        T = N;
    }
    return T;
}

struct floquet_pair {
    complex lambda;  // the |lambda| <= 1 multiplier
    complex u1, u0;  // (psi_1, psi_0) of the two-sided tail solution
};

inline floquet_pair make_pair_for(const transfer2& T, complex lam) {
    // eigenvector, numerically robust row choice
    complex v1a = T.t12, v2a = lam - T.t11;
    complex v1b = lam - T.t22, v2b = T.t21;
    floquet_pair fp;
    fp.lambda = lam;
    if (std::abs(v1a) + std::abs(v2a) >= std::abs(v1b) + std::abs(v2b)) {
        fp.u1 = v1a;
        fp.u0 = v2a;
    } else {
        fp.u1 = v1b;
        fp.u0 = v2b;
    }
    return fp;
}

inline floquet_pair tail_floquet_core(const PeriodicBackground& bg, int phase, const energy& en,
                                      complex disc2) {
    complex x = en.value();
    transfer2 T = period_transfer(bg, phase, x);
    complex delta = T.t11 + T.t22;
    if (std::abs(disc2) < 1e-250 * (1.0 + std::abs(delta) * std::abs(delta)))
        throw std::domain_error("tail m-function: band edge (|discriminant| = 2)");
    complex sq = std::sqrt(disc2);

    bool on_band = en.is_boundary() && x.imag() == 0.0 && disc2.imag() == 0.0 &&
                   disc2.real() < 0.0;
    if (on_band) {
        if (sq.imag() < 0.0) sq = -sq;  // sqrt(D^2 - 4) with positive imaginary part
        const double a0 = bg.a_cyc(phase - 1);
        for (complex lam : {0.5 * (delta - sq), 0.5 * (delta + sq)}) {
            auto fp = make_pair_for(T, lam);
            complex m = -fp.u1 / (a0 * fp.u0);
            if (m.imag() > 0.0) return fp;
        }
        throw numeric_error("tail m-function: Herglotz branch not found on band");
    }
    complex l1 = 0.5 * (delta + sq), l2 = 0.5 * (delta - sq);
    return make_pair_for(T, std::abs(l1) < std::abs(l2) ? l1 : l2);
}

inline floquet_pair tail_floquet(const PeriodicBackground& bg, int phase, const energy& en) {
    return tail_floquet_core(bg, phase, en, bg.disc2_minus4(en.value()));
}

struct projective {
    complex num, den;
};

inline projective tail_m_projective(const PeriodicBackground& bg, int phase, const energy& en,
                                    const complex* disc2_pre = nullptr) {
    auto fp = tail_floquet_core(bg, phase, en,
                                disc2_pre ? *disc2_pre : bg.disc2_minus4(en.value()));
    return {-fp.u1, bg.a_cyc(phase - 1) * fp.u0};
}

// m of J from the tail by unwinding the stripping relation
//   m(J^{(k-1)}) = 1 / (-z + b_k - a_k^2 m(J^{(k)})),
// carried projectively so intermediate poles need no special cases.
inline projective m_projective(const JacobiCoeffs& J, const energy& en,
                               const complex* disc2_pre = nullptr) {
    projective pr = tail_m_projective(J.tail(), J.phase(), en, disc2_pre);
    complex z = en.value();
    for (int k = J.head_len(); k >= 1; --k) {
        complex num = pr.den;
        complex den = (-z + J.b(k)) * pr.den - (J.a(k) * J.a(k)) * pr.num;
        pr = {num, den};
        double s = std::max(std::abs(pr.num), std::abs(pr.den));
        if (s > 0) {
            pr.num /= s;
            pr.den /= s;
        }
    }
    return pr;
}

}  // namespace detail

/// m(z, J) = <delta_1, (J - z)^{-1} delta_1>.  Boundary values on band
/// interiors are evaluated exactly at x + i0.  Band edges and poles (gap
/// eigenvalues) raise domain_error naming the feature.
inline complex m_function(const JacobiCoeffs& J, const energy& en) {
    if (!en.off_real_axis() && !en.is_boundary() && J.tail().bands().contains(en.real()))
        throw std::domain_error(
            "m_function: real x inside a band; request the x+i0 boundary value");
    auto pr = detail::m_projective(J, en);
    if (std::abs(pr.den) <= 1e-14 * std::abs(pr.num))
        throw std::domain_error("m_function: pole (gap eigenvalue) at x = " + fmt17(en.real()));
    return pr.num / pr.den;
}

/// w(x; J) = Im m(x + i0, J) / pi on band interiors.
inline double spectral_weight(const JacobiCoeffs& J, double x) {
    const GapSet& bands = J.tail().bands();
    if (!bands.contains(x) || bands.is_band_edge(x))
        throw std::domain_error("spectral_weight: x not in a band interior");
    return m_function(J, energy::boundary(x)).imag() / pi;
}

/// Edge-stable variant for quadrature nodes (exact edge distances flow into
/// the factored discriminant).
inline double spectral_weight(const JacobiCoeffs& J, const BandPoint& pt) {
    complex disc2(J.tail().disc2_minus4_stable(pt), 0.0);
    auto pr = detail::m_projective(J, energy::boundary(pt.x), &disc2);
    // m may legitimately blow up like dist^{-1/2} at a band edge; only an
    // exact zero denominator is unusable
    if (pr.den == 0.0)
        throw std::domain_error("spectral_weight: m-function pole at x = " + fmt17(pt.x));
    return (pr.num / pr.den).imag() / pi;
}

// ---------------------------------------------------------------------------
// gap_eigenvalues: poles of m off the essential spectrum.  Implemented as the
// zeros of psi_0(x), psi the tail-decaying solution extended backward through
// the head (a_0 = 1 at site 0), scanned on edge-clustered grids and bisected;
// weights from the explicit l^2 sums of psi; cross-checked against a
// Sturm-bisection truncation of size max(500, 50 * head).
// ---------------------------------------------------------------------------
namespace detail {

// psi_{N+1}, psi_{N+2} of the tail-decaying solution (real x off the bands)
inline void tail_seed(const JacobiCoeffs& J, double x, double& psi1, double& psi2,
                      double& lambda) {
    const auto& bg = J.tail();
    auto fp = tail_floquet(bg, J.phase(), energy::point(x));
    lambda = fp.lambda.real();
    // step site 1 of the two-sided tail: a1 psi2 = (x - b1) psi1 - a0 psi0
    double a1 = bg.a_cyc(J.phase()), a0 = bg.a_cyc(J.phase() - 1), b1 = bg.b_cyc(J.phase());
    psi1 = fp.u1.real();
    psi2 = ((x - b1) * psi1 - a0 * fp.u0.real()) / a1;
}

// psi_0 / psi_1; eigenvalues of J are its zeros.
inline double psi_ratio0(const JacobiCoeffs& J, double x) {
    double psi1, psi2, lam;
    tail_seed(J, x, psi1, psi2, lam);
    int N = J.head_len();
    double rho = psi1 / psi2;  // rho_{N+1} = psi_{N+1} / psi_{N+2}
    for (int n = N + 1; n >= 1; --n) {
        double a_prev = (n >= 2) ? J.a(n - 1) : 1.0;  // a_0 = 1 convention
        rho = ((x - J.b(n)) - J.a(n) / rho) / a_prev;
    }
    return rho;  // psi_0 / psi_1
}

// weight mu = psi_1^2 / sum_{n>=1} psi_n^2 at an eigenvalue
inline double eigen_weight(const JacobiCoeffs& J, double x) {
    const auto& bg = J.tail();
    const int N = J.head_len(), p = bg.period();
    double psi_t1, psi_t2, lam;
    tail_seed(J, x, psi_t1, psi_t2, lam);
    std::vector<double> psi(N + p + 2, 0.0);
    psi[N + 1] = psi_t1;
    psi[N + 2] = psi_t2;
    // forward through one tail block (pure tail recurrence, sites >= N+2)
    for (int n = N + 2; n <= N + p; ++n)
        psi[n + 1] = ((x - J.b(n)) * psi[n] - J.a(n - 1) * psi[n - 1]) / J.a(n);
    // backward through the glue and the head
    for (int n = N + 1; n >= 1; --n) {
        double a_prev = (n >= 2) ? J.a(n - 1) : 1.0;
        psi[n - 1] = ((x - J.b(n)) * psi[n] - J.a(n) * psi[n + 1]) / a_prev;
    }
    double block = 0.0;
    for (int j = 1; j <= p; ++j) block += psi[N + j] * psi[N + j];
    double tail_sum = block / (1.0 - lam * lam);
    double head_sum = 0.0;
    for (int n = 1; n <= N; ++n) head_sum += psi[n] * psi[n];
    return psi[1] * psi[1] / (head_sum + tail_sum);
}

}  // namespace detail

inline std::vector<PointMass> gap_eigenvalues(const JacobiCoeffs& J, double tol = 1e-10) {
    const GapSet& bands = J.tail().bands();
    const double span = bands.span();
    const double edge_eps = 1e-11 * span;
    const double bound = J.norm_bound() + 1.0;
    const int N = J.head_len();

    std::vector<std::pair<double, double>> intervals;
    if (-bound < bands.lo() - edge_eps) intervals.push_back({-bound, bands.lo() - edge_eps});
    for (int g = 0; g < bands.num_gaps(); ++g)
        intervals.push_back({bands.gap_lo(g) + edge_eps, bands.gap_hi(g) - edge_eps});
    if (bound > bands.hi() + edge_eps) intervals.push_back({bands.hi() + edge_eps, bound});

    std::vector<PointMass> out;
    const int grid_n = std::max(101, 24 * (N + 2));
    for (auto [A, B] : intervals) {
        if (!(B > A)) continue;
        // Chebyshev-clustered grid, dense near the ends where eigenvalues pile up
        std::vector<double> xs(grid_n), fs(grid_n);
        for (int i = 0; i < grid_n; ++i) {
            double th = pi * double(i) / (grid_n - 1);
            xs[i] = 0.5 * (A + B) - 0.5 * (B - A) * std::cos(th);
            fs[i] = detail::psi_ratio0(J, xs[i]);
        }
        for (int i = 0; i + 1 < grid_n; ++i) {
            double fa = fs[i], fb = fs[i + 1];
            if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
            if ((fa > 0) == (fb > 0)) continue;
            double a = xs[i], b = xs[i + 1];
            for (int it = 0; it < 100 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
                double m = 0.5 * (a + b);
                double fm = detail::psi_ratio0(J, m);
                if (!std::isfinite(fm)) break;
                ((fm > 0) == (fa > 0)) ? (a = m, fa = fm) : (b = m, fb = fm);
            }
            double xi = 0.5 * (a + b);
            // a sign change is either a zero (eigenvalue) or a pole of psi_0/psi_1
            if (std::abs(detail::psi_ratio0(J, xi)) > 1.0) continue;
            out.push_back({xi, detail::eigen_weight(J, xi)});
        }
    }
    std::sort(out.begin(), out.end(), [](auto& u, auto& v) { return u.x < v.x; });

    // mandatory cross-check, against finite sections of two sizes: the right
    // edge of a section carries its own surface state in each gap, which moves
    // with the cut phase, while genuine eigenvalues stay put
    const int Ntr = std::max(500, 50 * std::max(N, 1));
    TruncatedOperator T1 = truncate(J, Ntr), T2 = truncate(J, Ntr + 1);
    const double clearance = 1e-4 * span;
    auto resolution = [&](double x) {
        return 10.0 * span * std::exp(-Ntr * std::sqrt(dist_to_set(bands, x) / span));
    };
    for (auto [A, B] : intervals) {
        auto te1 = trunc_eigs(T1, A, B, std::min(tol, 1e-10));
        auto te2 = trunc_eigs(T2, A, B, std::min(tol, 1e-10));
        std::vector<double> te;
        std::vector<bool> used(te2.size(), false);
        for (double x : te1) {
            int best = -1;
            for (std::size_t j = 0; j < te2.size(); ++j) {
                if (used[j]) continue;
                if (best < 0 || std::abs(te2[j] - x) < std::abs(te2[best] - x))
                    best = static_cast<int>(j);
            }
            if (best >= 0 &&
                std::abs(te2[best] - x) <= std::max(1e-6 * span, resolution(x))) {
                used[best] = true;
                te.push_back(x);
            }
        }
        // recovery pass: a zero/pole pair of psi_0/psi_1 inside one grid cell
        // hides the sign change; re-scan locally around unmatched section
        // eigenvalues before judging consistency
        for (double t : te) {
            double w = std::max(1e-6 * span, 4.0 * resolution(t));
            bool matched = false;
            for (const auto& pm : out)
                if (std::abs(pm.x - t) <= std::max(w, 1e-7 * span)) matched = true;
            if (matched) continue;
            double lo = std::max(A, t - w), hi = std::min(B, t + w);
            const int M = 256;
            bool found_zero = false;
            double pole_at = std::numeric_limits<double>::quiet_NaN();
            double fprev = detail::psi_ratio0(J, lo);
            for (int i = 1; i <= M; ++i) {
                double x = lo + (hi - lo) * i / M;
                double fx = detail::psi_ratio0(J, x);
                if (std::isfinite(fprev) && std::isfinite(fx) && (fprev > 0) != (fx > 0)) {
                    double a = x - (hi - lo) / M, b = x, fa = fprev;
                    for (int it = 0; it < 100 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
                        double m = 0.5 * (a + b);
                        double fm = detail::psi_ratio0(J, m);
                        if (!std::isfinite(fm)) break;
                        ((fm > 0) == (fa > 0)) ? (a = m, fa = fm) : (b = m);
                    }
                    double xi = 0.5 * (a + b);
                    if (std::abs(detail::psi_ratio0(J, xi)) <= 1.0) {
                        bool dup = false;
                        for (const auto& pm : out)
                            if (std::abs(pm.x - xi) < 1e-10 * span) dup = true;
                        if (!dup) {
                            out.push_back({xi, detail::eigen_weight(J, xi)});
                            found_zero = true;
                        }
                    } else {
                        pole_at = xi;
                    }
                }
                fprev = fx;
            }
            // A bound state localized deep in the head couples to site 0 below
            // double resolution: its psi_0 zero collapses onto the adjacent
            // psi_1 pole and no sign change survives.  The section still sees
            // it; accept the pair at the pole position (the weight underflows
            // to its true size).
            if (!found_zero && std::isfinite(pole_at)) {
                bool dup = false;
                for (const auto& pm : out)
                    if (std::abs(pm.x - pole_at) < 1e-10 * span) dup = true;
                if (!dup) out.push_back({pole_at, detail::eigen_weight(J, pole_at)});
            }
        }
        std::sort(out.begin(), out.end(), [](auto& u, auto& v) { return u.x < v.x; });
        std::vector<double> texact, ttrunc;
        for (const auto& pm : out)
            if (pm.x > A && pm.x < B && dist_to_set(bands, pm.x) > clearance)
                texact.push_back(pm.x);
        for (double x : te)
            if (dist_to_set(bands, x) > clearance) ttrunc.push_back(x);
        if (texact.size() != ttrunc.size())
            throw consistency_error("gap_eigenvalues: count mismatch vs truncation in [" +
                                    fmt17(A) + ", " + fmt17(B) + "]: " +
                                    std::to_string(texact.size()) + " vs " +
                                    std::to_string(ttrunc.size()));
        for (std::size_t i = 0; i < texact.size(); ++i) {
            // the section resolves an eigenvalue only to exp(-2 N G(x)); loosen
            // the match tolerance for eigenvalues hugging a band edge
            double mtol = std::max(std::max(100 * tol, 1e-8 * span), resolution(texact[i]));
            if (std::abs(texact[i] - ttrunc[i]) > mtol)
                throw consistency_error("gap_eigenvalues: value mismatch vs truncation at " +
                                        fmt17(texact[i]) + " (delta " +
                                        fmt17(texact[i] - ttrunc[i]) + ")");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// SpectralMeasure: a.c. weight on the bands plus finitely many point masses.
// ---------------------------------------------------------------------------
struct SpectralMeasure {
    GapSet support;
    std::function<double(double)> weight;
    std::vector<PointMass> masses;
    bool normalized = true;
};

inline SpectralMeasure spectral_measure_of(const JacobiCoeffs& J, double tol = 1e-10) {
    SpectralMeasure mu;
    mu.support = J.tail().bands();
    mu.weight = [J](double x) { return spectral_weight(J, x); };
    mu.masses = gap_eigenvalues(J, tol);
    mu.normalized = true;
    return mu;
}

// ---------------------------------------------------------------------------
// stieltjes_from_measure: recurrence coefficients of a measure, via a banded
// quadrature discretization (Gauss-Legendre in the cosine variable per band,
// 20 N nodes per band by default) plus the point masses, fed to the
// Gragg-Harrod / RKPW coupled recurrence.  Moment-based Gram-Schmidt dies
// near n ~ 20; this does not.  Trust horizon from node-count doubling.
// ---------------------------------------------------------------------------
struct StieltjesResult {
    std::vector<double> a, b;  // a[k] = a_{k+1}, b[k] = b_{k+1}
    int trust_n = 0;           // largest n with node-doubling agreement
    double max_coeff_delta = 0.0;
};

namespace detail {

inline void rkpw(const std::vector<double>& x, const std::vector<double>& w,
                 std::vector<double>& alpha, std::vector<double>& beta, int n_out) {
    const int M = static_cast<int>(x.size());
    std::vector<double> p0(x), p1(M, 0.0);
    p1[0] = w[0];
    for (int n = 1; n < M; ++n) {
        double pn = w[n], gam = 1.0, sig = 0.0, t = 0.0;
        const double xlam = x[n];
        for (int k = 0; k <= n; ++k) {
            double rho = p1[k] + pn, tmp = gam * rho, tsig = sig;
            if (rho <= 0.0) {
                gam = 1.0;
                sig = 0.0;
            } else {
                gam = p1[k] / rho;
                sig = pn / rho;
            }
            double tk = sig * (p0[k] - xlam) - gam * t;
            p0[k] -= (tk - t);
            t = tk;
            pn = (sig <= 0.0) ? tsig * p1[k] : (t * t) / sig;
            p1[k] = tmp;
        }
    }
    n_out = std::min(n_out, M);
    alpha.assign(p0.begin(), p0.begin() + n_out);
    beta.assign(p1.begin(), p1.begin() + n_out);
}

inline void discretize(const SpectralMeasure& mu, int nodes_per_band,
                       std::vector<double>& xs, std::vector<double>& ws) {
    const auto& rule = gauss_rule<30>();
    int panels = (nodes_per_band + 29) / 30;
    for (const auto& bd : mu.support.bands()) {
        for (int pnl = 0; pnl < panels; ++pnl) {
            double t0 = pi * pnl / panels, t1 = pi * (pnl + 1) / panels;
            double mid = 0.5 * (t0 + t1), hh = 0.5 * (t1 - t0);
            for (auto [gx, gw] : rule) {
                double th = mid + hh * gx;
                double xx = bd.mid() + bd.half() * std::cos(th);
                xs.push_back(xx);
                ws.push_back(mu.weight(xx) * bd.half() * std::sin(th) * gw * hh);
            }
        }
    }
    for (const auto& pm : mu.masses) {
        xs.push_back(pm.x);
        ws.push_back(pm.mu);
    }
    std::vector<std::size_t> idx(xs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto u, auto v) { return xs[u] < xs[v]; });
    std::vector<double> x2(xs.size()), w2(ws.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        x2[i] = xs[idx[i]];
        w2[i] = ws[idx[i]];
    }
    xs.swap(x2);
    ws.swap(w2);
}

inline void coeffs_from_nodes(const SpectralMeasure& mu, int N, int nodes_per_band,
                              std::vector<double>& a, std::vector<double>& b) {
    std::vector<double> xs, ws;
    discretize(mu, nodes_per_band, xs, ws);
    double mass = 0.0;
    for (double w : ws) mass += w;
    if (mu.normalized) {
        if (std::abs(mass - 1.0) > 1e-6)
            throw std::invalid_argument("stieltjes: measure mass " + fmt17(mass) +
                                        " is not 1 (normalized flag set)");
        for (double& w : ws) w /= mass;
    }
    std::vector<double> alpha, beta;
    rkpw(xs, ws, alpha, beta, N + 1);
    a.clear();
    b.clear();
    for (int k = 0; k < N; ++k) {
        b.push_back(alpha[k]);
        double bb = beta[k + 1];
        if (!(bb > 0.0))
            throw numeric_error("stieltjes: lost positivity at n = " + std::to_string(k + 1) +
                                " (discretization exhausted)");
        a.push_back(std::sqrt(bb));
    }
}

}  // namespace detail

inline StieltjesResult stieltjes_from_measure(const SpectralMeasure& mu, int N,
                                              int nodes_per_band = 0) {
    if (N < 1) throw std::invalid_argument("stieltjes: N < 1");
    if (nodes_per_band <= 0) nodes_per_band = 20 * N;
    StieltjesResult r;
    detail::coeffs_from_nodes(mu, N, nodes_per_band, r.a, r.b);
    std::vector<double> a2, b2;
    detail::coeffs_from_nodes(mu, N, 2 * nodes_per_band, a2, b2);
    r.trust_n = N;
    for (int k = 0; k < N; ++k) {
        double d = std::abs(r.a[k] - a2[k]) + std::abs(r.b[k] - b2[k]);
        r.max_coeff_delta = std::max(r.max_coeff_delta, d);
        if (d > 1e-8 && r.trust_n == N) r.trust_n = k;
    }
    r.a = std::move(a2);  // report the finer-discretization coefficients
    r.b = std::move(b2);
    return r;
}

}  // namespace fgj
