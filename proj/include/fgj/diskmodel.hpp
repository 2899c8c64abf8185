#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "fgj/common.hpp"
#include "fgj/jacobi.hpp"
#include "fgj/quadrature.hpp"
#include "fgj/sumrule.hpp"

namespace fgj {

// ---------------------------------------------------------------------------
// The explicit l = 0 covering model for e = [-2, 2]: x(z) = z + 1/z maps the
// unit disk onto C u {inf} minus [-2,2], with x_inf = 1 and B(z) = z.  Gives
// fully computable Jost functions (Blaschke part times Szego part on the
// circle) and the nonlocal step-by-step sum rule.
// ---------------------------------------------------------------------------

inline complex cover0(complex z) {
    if (z == 0.0) throw std::domain_error("cover0: z = 0");
    return z + 1.0 / z;
}

/// Inverse branch into the closed unit disk.  For x in [-2,2] the boundary
/// value is taken from the +i0 side by default (z = e^{-i theta},
/// theta = arccos(x/2)); x - i0 gives the conjugate point.
inline complex cover0_inverse(const energy& en) {
    complex x = en.value();
    if (en.is_boundary() && std::abs(x.real()) <= 2.0) {
        double theta = std::acos(std::clamp(x.real() / 2.0, -1.0, 1.0));
        return std::exp(complex(0.0, -theta));
    }
    complex s = std::sqrt(x - 2.0) * std::sqrt(x + 2.0);  // cut exactly on [-2,2]
    complex z = 2.0 / (x + s);
    if (std::abs(z) > 1.0) z = 1.0 / (x - s) * 2.0;
    return z;
}

namespace detail {

inline void require_free_cover(const JacobiCoeffs& J) {
    const GapSet& b = J.tail().bands();
    if (b.num_bands() != 1 || std::abs(b.lo() + 2.0) > 1e-12 || std::abs(b.hi() - 2.0) > 1e-12)
        throw std::domain_error("disk model: essential spectrum must be [-2, 2]");
}

}  // namespace detail

/// M(z) = -m(x(z)); for the free operator this is the identity map on the disk.
inline complex M_of(const JacobiCoeffs& J, complex z) {
    detail::require_free_cover(J);
    if (std::abs(z) >= 1.0) throw std::domain_error("M_of: z outside the open disk");
    complex x = cover0(z);
    energy en = (x.imag() == 0.0) ? energy::point(x.real()) : energy::point(x);
    return -m_function(J, en);
}

/// Elementary Blaschke factor normalized positive at z = 0.
inline complex blaschke_factor(complex z, double p) {
    if (p == 0.0) return z;
    double s = p > 0 ? 1.0 : -1.0;
    return s * (p - z) / (1.0 - p * z);
}

// ---------------------------------------------------------------------------
// Alternating Blaschke product: poles at the disk images of the eigenvalues
// of J, zeros at those of J^{(1)}.  Within each component ((0,1) and (-1,0))
// the points must strictly interlace; the value at 0 is the step-by-step
// sum-rule factor K_1.
// ---------------------------------------------------------------------------
inline complex alternating_blaschke(const std::vector<double>& poles,
                                    const std::vector<double>& zeros, complex z) {
    for (double p : poles)
        if (!(std::abs(p) < 1.0) || p == 0.0)
            throw std::domain_error("alternating_blaschke: pole not in (-1,1) \\ {0}");
    for (double q : zeros)
        if (!(std::abs(q) < 1.0) || q == 0.0)
            throw std::domain_error("alternating_blaschke: zero not in (-1,1) \\ {0}");
    // interlacing check per component, ordered by distance from the boundary
    for (int side = 0; side < 2; ++side) {
        std::vector<std::pair<double, int>> pts;  // (position, who)
        for (double p : poles)
            if ((side == 0 && p > 0) || (side == 1 && p < 0)) pts.push_back({std::abs(p), 0});
        for (double q : zeros)
            if ((side == 0 && q > 0) || (side == 1 && q < 0)) pts.push_back({std::abs(q), 1});
        std::sort(pts.begin(), pts.end());
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            if (pts[i].second == pts[i + 1].second)
                throw std::domain_error("alternating_blaschke: poles and zeros fail to interlace");
    }
    complex v = 1.0;
    for (double q : zeros) v *= blaschke_factor(z, q);
    for (double p : poles) v /= blaschke_factor(z, p);
    return v;
}

// ---------------------------------------------------------------------------
// DiskMeasure: circle data of a spectral measure under the cover.  weight is
// w(x(e^{i theta})); zk are the disk images of the eigenvalues.
// ---------------------------------------------------------------------------
struct DiskMeasure {
    std::function<double(double)> weight_theta;
    std::vector<double> zk;
    int grid_size = 1 << 12;
};

inline DiskMeasure disk_measure_of(const JacobiCoeffs& J, int grid_size = 1 << 12,
                                   double tol = 1e-10) {
    detail::require_free_cover(J);
    DiskMeasure dm;
    dm.grid_size = grid_size;
    dm.weight_theta = [J](double theta) { return spectral_weight(J, 2.0 * std::cos(theta)); };
    for (const auto& pm : gap_eigenvalues(J, tol)) {
        complex z = cover0_inverse(energy::point(pm.x));
        dm.zk.push_back(z.real());
    }
    return dm;
}

/// Free reference weight on the circle, v(x(e^{i theta})) = |sin theta| / pi.
inline double free_weight_theta(double theta) { return std::abs(std::sin(theta)) / pi; }

// ---------------------------------------------------------------------------
// jost0: u(z; mu) = prod_k b(z, z_k) * exp( (1/4pi) int (e^{it}+z)/(e^{it}-z)
// log(v/w) dt ), the Blaschke part times the Szego part, reference weight v =
// free weight.  Uses the midpoint trapezoid (no node ever hits the band-edge
// angles); a weight vanishing on a set of positive measure surfaces as a
// divergent Szego integral and is flagged by a quadrature error.
// ---------------------------------------------------------------------------
inline complex jost0(const DiskMeasure& dm, complex z) {
    if (std::abs(z) >= 1.0) throw std::domain_error("jost0: z outside the open disk");
    const int M = dm.grid_size;
    complex acc = 0.0;
    for (int i = 0; i < M; ++i) {
        double theta = 2.0 * pi * (i + 0.5) / M;
        double ratio = free_weight_theta(theta) / dm.weight_theta(theta);
        double lg = std::log(ratio);
        if (!std::isfinite(lg))
            throw quadrature_error("jost0: Szego integrand not integrable (weight zero?)");
        complex eit = std::exp(complex(0.0, theta));
        acc += (eit + z) / (eit - z) * lg;
    }
    acc *= (2.0 * pi / M) / (4.0 * pi);
    complex u = std::exp(acc);
    for (double p : dm.zk) u *= blaschke_factor(z, p);
    return u;
}

inline complex jost0(const JacobiCoeffs& J, complex z, int grid_size = 1 << 12) {
    return jost0(disk_measure_of(J, grid_size), z);
}

// ---------------------------------------------------------------------------
// verify_nonlocal_sumrule: over a z-grid in the disk,
//   a_1 M(z) = B(z) B_inf(z) exp(Poisson[(1/2) log(Im M / Im M^(1))](z)),
// with the boundary ratio computed exactly as w(x;J)/w(x;J^(1)).  Also checks
// the shift identity a_n u_n(z) z^{-n} = u(z; mu_n) for n = 1..3 and reports
// the z -> 0 limit pair (a_1/cap versus B_inf(0) exp(Szego part at 0)).
// ---------------------------------------------------------------------------
struct NonlocalReport {
    double max_residual = 0.0;       // sup over grid of |log LHS - log RHS|
    double eq59_residual = 0.0;      // shift identity, n = 1..3
    double z0_lhs = 0.0, z0_rhs = 0.0;
    int nodes = 0;
};

inline NonlocalReport verify_nonlocal_sumrule(const JacobiCoeffs& J,
                                              const std::vector<complex>& z_grid,
                                              int nodes = 1 << 12) {
    detail::require_free_cover(J);
    NonlocalReport rep;
    rep.nodes = nodes;
    auto J1 = strip(J, 1);
    const double a1 = J.a(1);

    // boundary data log(w / w^(1)) at midpoint angles
    std::vector<double> logratio(nodes);
    for (int i = 0; i < nodes; ++i) {
        double theta = 2.0 * pi * (i + 0.5) / nodes;
        double x = 2.0 * std::cos(theta);
        logratio[i] = std::log(spectral_weight(J, x) / spectral_weight(J1, x));
    }
    auto poisson_half = [&](complex z) {
        complex acc = 0.0;
        for (int i = 0; i < nodes; ++i) {
            double theta = 2.0 * pi * (i + 0.5) / nodes;
            complex eit = std::exp(complex(0.0, theta));
            acc += (eit + z) / (eit - z) * logratio[i];
        }
        return acc * ((2.0 * pi / nodes) / (4.0 * pi));
    };

    std::vector<double> poles, zeros;
    for (const auto& pm : gap_eigenvalues(J))
        poles.push_back(cover0_inverse(energy::point(pm.x)).real());
    for (const auto& pm : gap_eigenvalues(J1))
        zeros.push_back(cover0_inverse(energy::point(pm.x)).real());

    for (complex z : z_grid) {
        complex lhs = a1 * M_of(J, z);
        complex rhs = z * alternating_blaschke(poles, zeros, z) * std::exp(poisson_half(z));
        rep.max_residual = std::max(rep.max_residual, std::abs(std::log(lhs / rhs)));
    }

    // shift identity via the Weyl product: u_n = u W_n, compare with the Jost
    // function of the n-times stripped measure
    auto dm = disk_measure_of(J);
    for (int n = 1; n <= 3; ++n) {
        auto dmn = disk_measure_of(strip(J, n));
        for (complex z : z_grid) {
            complex x = cover0(z);
            energy en = (x.imag() == 0.0) ? energy::point(x.real()) : energy::point(x);
            complex w = -m_function(J, en);
            for (int k = 1; k < n; ++k) w *= J.a(k) * (-m_function(strip(J, k), en));
            complex un = jost0(dm, z) * w;
            complex lhs = J.a(n) * un * std::pow(z, -n);
            complex rhs = jost0(dmn, z);
            rep.eq59_residual = std::max(rep.eq59_residual, std::abs(lhs - rhs));
        }
    }

    // z -> 0 limit (the step-by-step C0 sum rule)
    double szego0 = 0.0;
    for (int i = 0; i < nodes; ++i) szego0 += logratio[i];
    szego0 *= (2.0 * pi / nodes) / (4.0 * pi);
    complex binf0 = alternating_blaschke(poles, zeros, 0.0);
    rep.z0_lhs = a1;  // cap([-2,2]) = 1
    rep.z0_rhs = (binf0 * std::exp(szego0)).real();
    return rep;
}

}  // namespace fgj
