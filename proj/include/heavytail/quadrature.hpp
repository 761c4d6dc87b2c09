// Adaptive Gauss-Kronrod (G7,K15) quadrature with panel refinement.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace heavytail {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    bool converged = true;
    int evaluations = 0;
};

namespace detail {

// Kronrod-15 nodes/weights on [-1,1]; odd-indexed nodes are the Gauss-7 set.
inline constexpr std::array<double, 15> kronrod_nodes = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,                0.207784955007898,
    0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};

inline constexpr std::array<double, 15> kronrod_weights = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};

inline constexpr std::array<double, 7> gauss_weights = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870};

template <class F>
inline void gk15(const F& f, double a, double b, double& value, double& error) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double kron = 0.0, gauss = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double fx = f(mid + half * kronrod_nodes[i]);
        kron += kronrod_weights[i] * fx;
        if (i % 2 == 1) gauss += gauss_weights[i / 2] * fx;
    }
    value = kron * half;
    const double diff = std::fabs(kron - gauss) * std::fabs(half);
    error = diff < 1e-300 ? diff : std::pow(200.0 * diff, 1.5);
}

struct Panel {
    double a, b, value, error;
};

}  // namespace detail

/// Adaptive integration of f on [a,b]. Splits the worst panel until the
/// summed error estimate meets rel_tol (or abs floor), or the panel budget
/// runs out; in the latter case converged=false, never a silent result.
template <class F>
QuadResult integrate(const F& f, double a, double b, double rel_tol = 1e-10,
                     int max_panels = 2000) {
    QuadResult out;
    if (!(b > a)) return out;
    std::vector<detail::Panel> panels;
    double v, e;
    detail::gk15(f, a, b, v, e);
    out.evaluations = 15;
    panels.push_back({a, b, v, e});

    while (true) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total += panels[i].value;
            err += panels[i].error;
            if (panels[i].error > panels[worst].error) worst = i;
        }
        const double tol = rel_tol * std::max(std::fabs(total), 1e-300);
        if (err <= tol || err <= 1e-305) {
            out.value = total;
            out.abs_error = err;
            return out;
        }
        if (static_cast<int>(panels.size()) >= max_panels) {
            out.value = total;
            out.abs_error = err;
            out.converged = false;
            return out;
        }
        detail::Panel p = panels[worst];
        const double mid = 0.5 * (p.a + p.b);
        detail::Panel left{p.a, mid, 0, 0}, right{mid, p.b, 0, 0};
        detail::gk15(f, left.a, left.b, left.value, left.error);
        detail::gk15(f, right.a, right.b, right.value, right.error);
        out.evaluations += 30;
        panels[worst] = left;
        panels.push_back(right);
    }
}

/// Integrate f over a sequence of breakpoints, accumulating panel by panel.
template <class F>
QuadResult integrate_panels(const F& f, const std::vector<double>& breaks,
                            double rel_tol = 1e-10) {
    QuadResult out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        QuadResult part = integrate(f, breaks[i], breaks[i + 1], rel_tol);
        out.value += part.value;
        out.abs_error += part.abs_error;
        out.evaluations += part.evaluations;
        out.converged = out.converged && part.converged;
    }
    return out;
}

/// Geometric breakpoints a -> b (both > 0).
inline std::vector<double> log_spaced(double a, double b, int n) {
    if (!(a > 0.0) || !(b > a) || n < 2) throw std::invalid_argument("log_spaced: bad range");
    std::vector<double> xs(static_cast<std::size_t>(n));
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i)
        xs[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / (n - 1));
    xs.front() = a;
    xs.back() = b;
    return xs;
}

/// Upper tail integral ∫_x^∞ f, for integrands decaying at least polynomially
/// faster than 1/y beyond `effective_end` (caller supplies a high quantile).
template <class F>
QuadResult integrate_tail(const F& f, double x, double effective_end,
                          double rel_tol = 1e-10) {
    if (effective_end <= x) {
        return QuadResult{};
    }
    // log-spaced panels suit polynomial and stretch-exponential decay
    const double lo = std::max(x, 1e-12);
    std::vector<double> breaks = log_spaced(lo, effective_end, 40);
    if (x < lo) breaks.insert(breaks.begin(), x);
    return integrate_panels(f, breaks, rel_tol);
}

}  // namespace heavytail
