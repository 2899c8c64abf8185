#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fgj/common.hpp"
#include "fgj/jacobi.hpp"
#include "fgj/tridiag.hpp"

namespace fgj {

struct Interval {
    double lo = 0.0, hi = 0.0;
    double width() const { return hi - lo; }
};

/// dist(x, R \ (lo, hi)) for x inside the interval.
inline double dist_to_complement(const Interval& iv, double x) {
    return std::min(x - iv.lo, iv.hi - x);
}

// ---------------------------------------------------------------------------
// EigReport: eigenvalues of a finite section in an interval, with the
// half-power distance sum.  Values closer than 1e-9 * span are merged and
// carried with multiplicity (Sturm counts are exact, but clustering below
// the bisection tolerance is unresolvable).
// ---------------------------------------------------------------------------
struct EigReport {
    Interval interval;
    std::vector<double> eigenvalues;  // distinct values
    std::vector<int> multiplicity;
    double sigma = 0.0;  // sum over eigenvalues (with multiplicity) of dist^{1/2}
};

inline EigReport make_eig_report(const TruncatedOperator& T, const Interval& iv, double tol) {
    auto raw = trunc_eigs(T, iv.lo, iv.hi, tol);
    EigReport r;
    r.interval = iv;
    double merge_tol = 1e-9 * std::max(1.0, T.norm_bound());
    for (double x : raw) {
        if (!r.eigenvalues.empty() && x - r.eigenvalues.back() < merge_tol) {
            ++r.multiplicity.back();
        } else {
            r.eigenvalues.push_back(x);
            r.multiplicity.push_back(1);
        }
        r.sigma += std::sqrt(std::max(0.0, dist_to_complement(iv, x)));
    }
    return r;
}

/// Sigma_{(a,b)}: half-power distance sum over section eigenvalues in (a,b),
/// counted with multiplicity.
inline double sigma_interval(const TruncatedOperator& T, const Interval& iv,
                             double tol = 1e-11) {
    return make_eig_report(T, iv, tol).sigma;
}

/// Same quantity for an eventually periodic operator, from its exact gap
/// eigenvalue list (caller asserts the interval avoids the essential spectrum).
inline double sigma_interval(const JacobiCoeffs& J, const Interval& iv, double tol = 1e-10) {
    double s = 0.0;
    for (const auto& pm : gap_eigenvalues(J, tol))
        if (pm.x > iv.lo && pm.x < iv.hi) s += std::sqrt(dist_to_complement(iv, pm.x));
    return s;
}

/// E(J) = sum over eigenvalues off the essential spectrum of dist(x, e)^{1/2}.
inline double eig_sum_E(const JacobiCoeffs& J, double tol = 1e-10) {
    const GapSet& bands = J.tail().bands();
    double s = 0.0;
    for (const auto& pm : gap_eigenvalues(J, tol)) s += std::sqrt(dist_to_set(bands, pm.x));
    return s;
}

// ---------------------------------------------------------------------------
// check_interlacing: eigenvalues of J and J^{(1)} in a gap must strictly
// alternate, in one of the two orders.  Pairs closer than tol are flagged
// inconclusive rather than counted as violations.
// ---------------------------------------------------------------------------
struct InterlacingReport {
    int pattern = 0;  // 1: x1(J) > x1(J1) > ...; 2: x1(J1) > x1(J) > ...; 0: vacuous
    bool ok = true;
    bool inconclusive = false;
    std::vector<double> eig_J, eig_J1;  // descending
    std::vector<std::string> violations;
};

inline InterlacingReport check_interlacing(const JacobiCoeffs& J, const Interval& gap,
                                           double tol = 1e-12) {
    InterlacingReport rep;
    auto collect = [&](const JacobiCoeffs& op) {
        std::vector<double> xs;
        for (const auto& pm : gap_eigenvalues(op))
            if (pm.x > gap.lo && pm.x < gap.hi) xs.push_back(pm.x);
        std::sort(xs.rbegin(), xs.rend());
        return xs;
    };
    rep.eig_J = collect(J);
    rep.eig_J1 = collect(strip(J, 1));
    if (rep.eig_J.empty() && rep.eig_J1.empty()) return rep;  // vacuous pass

    struct Tagged {
        double x;
        int who;  // 0 = J, 1 = J1
    };
    std::vector<Tagged> merged;
    for (double x : rep.eig_J) merged.push_back({x, 0});
    for (double x : rep.eig_J1) merged.push_back({x, 1});
    std::sort(merged.begin(), merged.end(), [](auto& u, auto& v) { return u.x > v.x; });
    for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
        if (merged[i].x - merged[i + 1].x < tol) {
            rep.inconclusive = true;
            return rep;
        }
        if (merged[i].who == merged[i + 1].who) {
            rep.ok = false;
            rep.violations.push_back("consecutive eigenvalues of the same operator at x = " +
                                     fmt17(merged[i].x) + ", " + fmt17(merged[i + 1].x));
        }
    }
    if (std::abs(static_cast<int>(rep.eig_J.size()) - static_cast<int>(rep.eig_J1.size())) > 1) {
        rep.ok = false;
        rep.violations.push_back("list sizes differ by more than one");
    }
    rep.pattern = merged.front().who == 0 ? 1 : 2;
    return rep;
}

// ---------------------------------------------------------------------------
// verify_rank_bound: randomized instances of the rank-r perturbation /
// projection-compression bounds
//   Sigma_{(a,b)}(B) <= Sigma_{(a,b)}(A) + r ((b-a)/2)^{1/2}
// plus the near-edge refinement
//   sum_{x_k(B) in (a,a+d)} (x_k(B)-a)^{1/2} <= r d^{1/2}
//     + sum_{x_k(A) in (a,a+2d)} (x_k(A)-a)^{1/2}       (d < (b-a)/4).
// Finite sections have empty essential spectrum, so any interval qualifies.
// ---------------------------------------------------------------------------
enum class RankKind { additive, projection };

struct RankBoundReport {
    std::string theorem = "3.5";
    int trials = 0;
    int violations = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    double min_edge_margin = std::numeric_limits<double>::infinity();
    std::vector<std::string> violation_notes;
};

namespace detail {

inline double near_edge_sum(const std::vector<double>& eigs, double a, double delta) {
    double s = 0.0;
    for (double x : eigs)
        if (x > a && x < a + delta) s += std::sqrt(x - a);
    return s;
}

}  // namespace detail

inline RankBoundReport verify_rank_bound(const TruncatedOperator& A, RankKind kind,
                                         const Interval& iv, int trials,
                                         std::uint64_t seed, double slack = 1e-12) {
    RankBoundReport rep;
    rep.theorem = "3.5";
    rep.trials = trials;
    auto eigs_A_all = trunc_eigs(A, iv.lo, iv.hi, 1e-12);
    double sigma_A = 0.0;
    for (double x : eigs_A_all) sigma_A += std::sqrt(dist_to_complement(iv, x));

    for (int t = 0; t < trials; ++t) {
        auto rng = rng_for_trial(seed, t);
        TruncatedOperator B = A;
        int r = 0;
        if (kind == RankKind::additive) {
            std::uniform_int_distribution<int> rd(1, 3);
            r = rd(rng);
            std::uniform_int_distribution<int> site(0, A.size() - 1);
            std::uniform_real_distribution<double> amp(-2.0, 2.0);
            std::vector<int> used;
            for (int i = 0; i < r; ++i) {
                int s = site(rng);
                while (std::find(used.begin(), used.end(), s) != used.end()) s = site(rng);
                used.push_back(s);
                B.diag[s] += amp(rng);  // rank-one diagonal bump per site
            }
        } else {
            // delete one interior row/column: rank(P A (1-P)) = 1
            r = 1;
            std::uniform_int_distribution<int> site(1, A.size() - 2);
            int k = site(rng);
            TruncatedOperator left{{A.diag.begin(), A.diag.begin() + k},
                                   {A.off.begin(), A.off.begin() + (k - 1)}};
            TruncatedOperator right{{A.diag.begin() + k + 1, A.diag.end()},
                                    {A.off.begin() + k + 1, A.off.end()}};
            // evaluate both blocks and pool the eigenvalues
            double sigma_B = 0.0;
            std::vector<double> eB;
            for (const auto* blk : {&left, &right}) {
                auto e = trunc_eigs(*blk, iv.lo, iv.hi, 1e-12);
                eB.insert(eB.end(), e.begin(), e.end());
                for (double x : e) sigma_B += std::sqrt(dist_to_complement(iv, x));
            }
            double margin = sigma_A + r * std::sqrt(0.5 * iv.width()) - sigma_B;
            rep.min_margin = std::min(rep.min_margin, margin);
            if (margin < -slack) {
                ++rep.violations;
                rep.violation_notes.push_back("projection trial " + std::to_string(t) +
                                              " margin " + fmt17(margin));
            }
            std::sort(eB.begin(), eB.end());
            for (double frac : {0.125, 0.0625}) {
                double d = frac * iv.width();
                double lhs = detail::near_edge_sum(eB, iv.lo, d);
                double rhs = r * std::sqrt(d) + detail::near_edge_sum(eigs_A_all, iv.lo, 2 * d);
                rep.min_edge_margin = std::min(rep.min_edge_margin, rhs - lhs);
                if (rhs - lhs < -slack) {
                    ++rep.violations;
                    rep.violation_notes.push_back("projection trial " + std::to_string(t) +
                                                  " edge margin " + fmt17(rhs - lhs));
                }
            }
            continue;
        }
        auto eB = trunc_eigs(B, iv.lo, iv.hi, 1e-12);
        double sigma_B = 0.0;
        for (double x : eB) sigma_B += std::sqrt(dist_to_complement(iv, x));
        double margin = sigma_A + r * std::sqrt(0.5 * iv.width()) - sigma_B;
        rep.min_margin = std::min(rep.min_margin, margin);
        if (margin < -slack) {
            ++rep.violations;
            rep.violation_notes.push_back("additive trial " + std::to_string(t) + " margin " +
                                          fmt17(margin));
        }
        for (double frac : {0.125, 0.0625}) {
            double d = frac * iv.width();
            double lhs = detail::near_edge_sum(eB, iv.lo, d);
            double rhs = r * std::sqrt(d) + detail::near_edge_sum(eigs_A_all, iv.lo, 2 * d);
            rep.min_edge_margin = std::min(rep.min_edge_margin, rhs - lhs);
            if (rhs - lhs < -slack) {
                ++rep.violations;
                rep.violation_notes.push_back("additive trial " + std::to_string(t) +
                                              " edge margin " + fmt17(rhs - lhs));
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// stripped_eig_profile: eigenvalue counts of J^{(n)} in a shrunken gap, and
// near-edge half-power sums on a delta ladder.  Counts must drop to <= 1
// beyond some n (at most one eigenvalue survives deep stripping in a gap).
// ---------------------------------------------------------------------------
struct StrippedProfile {
    std::vector<int> counts;          // per n = 0..n_max
    int threshold = -1;               // first n with count <= 1 from there on
    std::vector<double> deltas;       // ladder
    std::vector<double> edge_sums;    // max over n of the lower-edge sum per delta
};

inline StrippedProfile stripped_eig_profile(const JacobiCoeffs& J, const Interval& gap,
                                            double eps, int n_max) {
    if (!(eps > 0)) throw std::invalid_argument("stripped_eig_profile: eps <= 0");
    StrippedProfile prof;
    for (int k = 3; k <= 6; ++k) prof.deltas.push_back(gap.width() / double(1 << k));
    prof.edge_sums.assign(prof.deltas.size(), 0.0);
    for (int n = 0; n <= n_max; ++n) {
        auto evs = gap_eigenvalues(strip(J, n));
        int count = 0;
        for (const auto& pm : evs)
            if (pm.x > gap.lo + eps && pm.x < gap.hi - eps) ++count;
        prof.counts.push_back(count);
        for (std::size_t d = 0; d < prof.deltas.size(); ++d) {
            double s = 0.0;
            for (const auto& pm : evs)
                if (pm.x > gap.lo && pm.x < gap.lo + prof.deltas[d])
                    s += std::sqrt(pm.x - gap.lo);
            prof.edge_sums[d] = std::max(prof.edge_sums[d], s);
        }
    }
    for (int n = 0; n <= n_max; ++n) {
        bool all_ok = true;
        for (int k = n; k <= n_max; ++k) all_ok = all_ok && prof.counts[k] <= 1;
        if (all_ok) {
            prof.threshold = n;
            break;
        }
    }
    return prof;
}

// ---------------------------------------------------------------------------
// splice: head of J up to site m, then Jtilde stripped q times.  The bound
//   E(J_{m,q}) <= E(J) + E(Jtilde) + K
// is checked with K computed from the proof: 5 gamma per gap plus the two
// exterior intervals, gamma_I = (|I|/2)^{1/2}, the exterior cut kappa placed
// deep enough that dist(x, complement) = dist(x, e) for every eigenvalue.
// ---------------------------------------------------------------------------
struct SpliceReport {
    JacobiCoeffs spliced;
    double E_J = 0.0, E_Jt = 0.0, E_spliced = 0.0;
    double K = 0.0;
    double margin = 0.0;  // E_J + E_Jt + K - E_spliced, must be >= 0
};

inline JacobiCoeffs splice_operator(const JacobiCoeffs& J, const JacobiCoeffs& Jt, int m,
                                    int q) {
    if (!same_background(J.tail(), Jt.tail()))
        throw std::domain_error("splice: operators have different essential spectra");
    auto Jq = strip(Jt, q);
    std::vector<double> ha, hb;
    for (int n = 1; n <= m; ++n) {
        ha.push_back(J.a(n));
        hb.push_back(J.b(n));
    }
    ha.insert(ha.end(), Jq.head_a().begin(), Jq.head_a().end());
    hb.insert(hb.end(), Jq.head_b().begin(), Jq.head_b().end());
    return JacobiCoeffs::make(std::move(ha), std::move(hb), Jq.tail(), Jq.phase());
}

inline SpliceReport splice(const JacobiCoeffs& J, const JacobiCoeffs& Jt, int m, int q) {
    SpliceReport rep{splice_operator(J, Jt, m, q)};
    rep.E_J = eig_sum_E(J);
    rep.E_Jt = eig_sum_E(Jt);
    rep.E_spliced = eig_sum_E(rep.spliced);
    const GapSet& bands = J.tail().bands();
    double K = 0.0;
    for (int g = 0; g < bands.num_gaps(); ++g)
        K += 5.0 * std::sqrt(0.5 * (bands.gap_hi(g) - bands.gap_lo(g)));
    double norm_bound = 2.0 * J.norm_bound() + Jt.norm_bound();  // crude over-estimate
    double kappa_lo = -2.0 * norm_bound - std::abs(bands.lo()) - 1.0;
    double kappa_hi = 2.0 * norm_bound + std::abs(bands.hi()) + 1.0;
    K += 5.0 * std::sqrt(0.5 * (bands.lo() - kappa_lo));
    K += 5.0 * std::sqrt(0.5 * (kappa_hi - bands.hi()));
    rep.K = K;
    rep.margin = rep.E_J + rep.E_Jt + rep.K - rep.E_spliced;
    return rep;
}

}  // namespace fgj
