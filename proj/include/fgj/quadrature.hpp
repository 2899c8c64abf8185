#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "fgj/common.hpp"

namespace fgj {

template <typename T>
struct quad_result {
    T value{};
    double error = 0.0;
    int panels = 0;
    bool converged = false;
};

namespace detail {

// Fixed Gauss-Legendre rules; nodes/weights come from boost.math.
template <unsigned Order, typename T, typename F>
T gauss_panel(const F& f, double a, double b) {
    using rule = boost::math::quadrature::gauss<double, Order>;
    const auto& xs = rule::abscissa();  // nonnegative half
    const auto& ws = rule::weights();
    const double mid = 0.5 * (a + b), h = 0.5 * (b - a);
    T sum{};
    std::size_t start = (Order & 1u) ? 1 : 0;
    if (Order & 1u) sum += T(ws[0] * f(mid));
    for (std::size_t i = start; i < xs.size(); ++i) {
        sum += T(ws[i] * (f(mid + h * xs[i]) + f(mid - h * xs[i])));
    }
    return sum * h;
}

template <typename T>
struct panel {
    double a, b;
    T q;
    double err;
};

// full node/weight table on [-1, 1] (boost stores the nonnegative half)
template <unsigned Order>
inline const std::vector<std::pair<double, double>>& gauss_rule() {
    static const std::vector<std::pair<double, double>> rule = [] {
        using R = boost::math::quadrature::gauss<double, Order>;
        std::vector<std::pair<double, double>> r;
        const auto& xs = R::abscissa();
        const auto& ws = R::weights();
        std::size_t start = (Order & 1u) ? 1 : 0;
        if (Order & 1u) r.push_back({0.0, ws[0]});
        for (std::size_t i = start; i < xs.size(); ++i) {
            r.push_back({xs[i], ws[i]});
            r.push_back({-xs[i], ws[i]});
        }
        std::sort(r.begin(), r.end());
        return r;
    }();
    return rule;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Adaptive Gauss quadrature on [a, b]: per-panel error from comparing a
// 15-point and a 25-point rule, worst panel split first.  Integrands are
// expected smooth up to endpoint log singularities (the band substitution
// removes inverse square roots before we ever get here).
// ---------------------------------------------------------------------------
template <typename T, typename F>
quad_result<T> adaptive_integrate(const F& f, double a, double b, double abs_tol,
                                  double rel_tol = 1e-13, int max_panels = 40000,
                                  const std::vector<double>& breaks = {}) {
    auto make_panel = [&](double lo, double hi) {
        detail::panel<T> p;
        p.a = lo;
        p.b = hi;
        T q15 = detail::gauss_panel<15, T>(f, lo, hi);
        p.q = detail::gauss_panel<25, T>(f, lo, hi);
        p.err = std::abs(p.q - q15);
        return p;
    };

    auto cmp = [](const detail::panel<T>& x, const detail::panel<T>& y) {
        return x.err < y.err;
    };
    std::priority_queue<detail::panel<T>, std::vector<detail::panel<T>>, decltype(cmp)> q(cmp);

    quad_result<T> res;
    T total{};
    double errsum = 0.0;
    std::vector<double> pts{a};
    for (double t : breaks)
        if (t > a && t < b) pts.push_back(t);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        auto p = make_panel(pts[i], pts[i + 1]);
        total += p.q;
        errsum += p.err;
        q.push(std::move(p));
        ++res.panels;
    }

    for (;;) {
        double tol = std::max(abs_tol, rel_tol * std::abs(total));
        if (errsum <= tol) {
            res.value = total;
            res.error = errsum;
            res.converged = true;
            return res;
        }
        if (res.panels >= max_panels || !std::isfinite(errsum)) {
            res.value = total;
            res.error = errsum;
            res.converged = false;
            return res;
        }
        auto worst = q.top();
        q.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // width at rounding floor
            errsum -= worst.err;
            worst.err = 0.0;
            q.push(worst);
            continue;
        }
        auto left = make_panel(worst.a, mid);
        auto right = make_panel(mid, worst.b);
        total += left.q + right.q - worst.q;
        errsum += left.err + right.err - worst.err;
        q.push(std::move(left));
        q.push(std::move(right));
        ++res.panels;
    }
}

/// Uniform midpoint trapezoid on a 2*pi-periodic integrand, doubling the node
/// count until two successive levels agree.  Spectrally accurate for smooth
/// boundary data.
template <typename T, typename F>
quad_result<T> periodic_trapezoid(const F& f, double tol, int min_nodes = 256,
                                  int max_nodes = 1 << 16) {
    auto eval = [&](int n) {
        T sum{};
        for (int i = 0; i < n; ++i) {
            double theta = 2.0 * pi * (i + 0.5) / n;
            sum += f(theta);
        }
        return sum * (2.0 * pi / n);
    };
    quad_result<T> res;
    T prev = eval(min_nodes);
    for (int n = 2 * min_nodes; n <= max_nodes; n *= 2) {
        T cur = eval(n);
        res.error = std::abs(cur - prev);
        res.value = cur;
        res.panels = n;
        if (res.error <= std::max(tol, 1e-15 * std::abs(cur))) {
            res.converged = true;
            return res;
        }
        prev = cur;
    }
    return res;
}

}  // namespace fgj
