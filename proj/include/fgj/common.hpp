#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgj {

using complex = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;

/// Quadrature did not reach the requested tolerance; the message carries the
/// best available estimate.
struct quadrature_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two independent computations of the same quantity disagree beyond tolerance.
struct consistency_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A numeric procedure (root finding, linear solve) failed to converge.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double sq(double x) { return x * x; }

// ---------------------------------------------------------------------------
// energy: a spectral parameter.  Either a genuine complex number or a real x
// tagged as the boundary value x + i0 (used for band-interior evaluations,
// where the limit is taken exactly rather than by letting Im z -> 0).
// ---------------------------------------------------------------------------
class energy {
  public:
    static energy point(complex z) { return energy(z, false); }
    static energy point(double x) { return energy(complex(x, 0.0), false); }
    static energy boundary(double x) { return energy(complex(x, 0.0), true); }

    complex value() const { return z_; }
    double real() const { return z_.real(); }
    double imag() const { return z_.imag(); }
    bool is_boundary() const { return boundary_; }
    bool off_real_axis() const { return z_.imag() != 0.0; }

  private:
    energy(complex z, bool b) : z_(z), boundary_(b) {}
    complex z_;
    bool boundary_;
};

// ---------------------------------------------------------------------------
// scaled<T>: value v * exp(lg), kept with |v| near 1.  Used by the long
// three-term recurrences where raw values reach exp(+-n G) and overflow
// around n ~ 700.
// ---------------------------------------------------------------------------
template <typename T>
struct scaled {
    T v{};
    double lg = 0.0;

    double log_abs() const { return lg + std::log(std::abs(v)); }

    T value() const { return v * std::exp(lg); }

    void normalize() {
        double a = std::abs(v);
        if (a == 0.0) {
            lg = 0.0;
            return;
        }
        if (a > 1e100 || a < 1e-100) {
            v /= a;
            lg += std::log(a);
        }
    }
};

template <typename T>
scaled<T> scaled_mul(const scaled<T>& x, const scaled<T>& y) {
    scaled<T> r{x.v * y.v, x.lg + y.lg};
    r.normalize();
    return r;
}

// Sum two scaled values by aligning to the larger exponent.
template <typename T>
scaled<T> scaled_add(const scaled<T>& x, const scaled<T>& y) {
    if (std::abs(x.v) == 0.0) return y;
    if (std::abs(y.v) == 0.0) return x;
    const scaled<T>&hi = (x.lg >= y.lg) ? x : y, &lo = (x.lg >= y.lg) ? y : x;
    double d = lo.lg - hi.lg;
    scaled<T> r{hi.v + lo.v * std::exp(d), hi.lg};
    r.normalize();
    return r;
}

/// Deterministic per-trial generator: suites derive instance k's stream from
/// seed + k so trials can run in any order.
inline std::mt19937_64 rng_for_trial(std::uint64_t seed, std::uint64_t trial) {
    return std::mt19937_64(seed + trial);
}

/// Format with 17 significant digits (round-trip safe for doubles).
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

}  // namespace fgj
