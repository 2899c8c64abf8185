#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fgj/common.hpp"

namespace fgj {

// ---------------------------------------------------------------------------
// TruncatedOperator: a finite symmetric tridiagonal section, diag b[1..N],
// off-diagonal a[1..N-1] > 0.
// ---------------------------------------------------------------------------
struct TruncatedOperator {
    std::vector<double> diag;
    std::vector<double> off;

    static TruncatedOperator make(std::vector<double> d, std::vector<double> o) {
        if (d.empty() || o.size() + 1 != d.size())
            throw std::invalid_argument("truncated operator: size mismatch");
        for (double a : o)
            if (!(a > 0)) throw std::invalid_argument("truncated operator: off-diagonal <= 0");
        return TruncatedOperator{std::move(d), std::move(o)};
    }

    int size() const { return static_cast<int>(diag.size()); }

    double norm_bound() const {
        double m = 0.0;
        for (int i = 0; i < size(); ++i) {
            double s = std::abs(diag[i]);
            if (i > 0) s += off[i - 1];
            if (i + 1 < size()) s += off[i];
            m = std::max(m, s);
        }
        return m;
    }
};

/// Number of eigenvalues strictly below x (Sturm sequence / LDL^T sign count).
inline int sturm_count(const TruncatedOperator& T, double x) {
    int count = 0;
    double d = 1.0;
    const int n = T.size();
    for (int i = 0; i < n; ++i) {
        double offsq = (i > 0) ? T.off[i - 1] * T.off[i - 1] : 0.0;
        d = (T.diag[i] - x) - (i > 0 ? offsq / d : 0.0);
        if (d == 0.0) d = -1e-300;  // pivot breakdown: nudge, counts as negative
        if (d < 0.0) ++count;
    }
    return count;
}

// ---------------------------------------------------------------------------
// All eigenvalues of T in (lo, hi), each isolated by bisection on the Sturm
// count to absolute accuracy tol.  Repeated entries encode multiplicity
// (clusters below the bisection resolution come out as equal values).
// Bisection is unconditionally convergent, so there is no failure path.
// ---------------------------------------------------------------------------
inline std::vector<double> trunc_eigs(const TruncatedOperator& T, double lo, double hi,
                                      double tol) {
    std::vector<double> out;
    if (!(lo < hi)) return out;
    int klo = sturm_count(T, lo), khi = sturm_count(T, hi);
    for (int j = klo; j < khi; ++j) {
        // smallest x with count(x) >= j+1
        double a = lo, b = hi;
        while (b - a > tol) {
            double m = 0.5 * (a + b);
            if (m <= a || m >= b) break;
            (sturm_count(T, m) >= j + 1) ? b = m : a = m;
        }
        out.push_back(0.5 * (a + b));
    }
    return out;
}

}  // namespace fgj
