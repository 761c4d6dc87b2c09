// Weak-dependence kernels h(y) for pairs (X, Y): the independent kernel and
// the FGM copula kernel, with exact conditional tails, dependent pair
// sampling, and numeric verification of the two standing assumptions.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "heavytail/diagnostics.hpp"
#include "heavytail/tail_model.hpp"

namespace heavytail {

/// Dependence structure of a pair (X, Y) expressed through the kernel
/// h(y) = lim_x P[X>x | Y=y] / F_bar(x). The Y-marginal g is owned by the
/// kernel; the X-marginal is supplied per call so one kernel serves many f.
class DependenceKernel {
public:
    virtual ~DependenceKernel() = default;
    virtual std::string kind() const = 0;
    virtual double theta() const { return 0.0; }
    virtual const ModelPtr& g() const = 0;
    virtual double h(double y) const = 0;
    /// P[X > x | Y = y], exact (not asymptotic).
    virtual double conditional_tail(const TailModel& f, double x, double y) const = 0;
    virtual std::pair<double, double> sample_pair(const TailModel& f,
                                                  RngStream& stream) const = 0;
};

using KernelPtr = std::shared_ptr<const DependenceKernel>;

class IndependentKernel final : public DependenceKernel {
public:
    explicit IndependentKernel(ModelPtr g) : g_(std::move(g)) {}
    std::string kind() const override { return "independent"; }
    const ModelPtr& g() const override { return g_; }
    double h(double) const override { return 1.0; }
    double conditional_tail(const TailModel& f, double x, double) const override {
        return f.tail(x);
    }
    std::pair<double, double> sample_pair(const TailModel& f,
                                          RngStream& stream) const override {
        const double x = f.quantile(stream.next_uniform());
        const double y = g_->quantile(stream.next_uniform());
        return {x, y};
    }

private:
    ModelPtr g_;
};

/// Farlie-Gumbel-Morgenstern copula C(u,v) = uv(1 + theta(1-u)(1-v)).
/// Differentiating in v gives C_{1|2}(u|v) = u(1 + theta(1-u)(1-2v)), hence
///   P[X>x | Y=y] = F_bar(x) (1 - theta F(x) (1 - 2G(y)))
///   h(y)         = 1 + theta (2G(y) - 1).
class FgmKernel final : public DependenceKernel {
public:
    FgmKernel(double theta, ModelPtr g) : theta_(theta), g_(std::move(g)) {
        if (!(theta >= -1.0 && theta <= 1.0))
            throw std::invalid_argument("fgm: theta must lie in [-1,1]");
    }
    std::string kind() const override { return "fgm"; }
    double theta() const override { return theta_; }
    const ModelPtr& g() const override { return g_; }
    double h(double y) const override {
        return 1.0 + theta_ * (1.0 - 2.0 * g_->tail(y));
    }
    double conditional_tail(const TailModel& f, double x, double y) const override {
        const double fbar = f.tail(x);
        const double s = 1.0 - 2.0 * g_->tail(y);  // 2G(y) - 1
        return fbar * (1.0 + theta_ * (1.0 - fbar) * s);
    }
    std::pair<double, double> sample_pair(const TailModel& f,
                                          RngStream& stream) const override {
        const double v = stream.next_uniform();
        const double w = stream.next_uniform();
        // invert C_{1|2}(u|v) = w: A u^2 - (1+A) u + w = 0 with A = theta(1-2v)
        const double A = theta_ * (1.0 - 2.0 * v);
        double u;
        if (std::fabs(A) < 1e-12) {
            u = w;
        } else {
            const double disc = (1.0 + A) * (1.0 + A) - 4.0 * A * w;
            u = (1.0 + A - std::sqrt(std::max(disc, 0.0))) / (2.0 * A);
        }
        if (!(u > -1e-12 && u < 1.0 + 1e-12))
            throw std::logic_error("fgm sample_pair: conditional root left [0,1]");
        u = std::clamp(u, 1e-300, 1.0 - 1e-16);
        return {f.quantile(u), g_->quantile(v)};
    }

private:
    double theta_;
    ModelPtr g_;
};

inline KernelPtr independent_kernel(ModelPtr g) {
    return std::make_shared<IndependentKernel>(std::move(g));
}

inline KernelPtr fgm_kernel(double theta, ModelPtr g) {
    return std::make_shared<FgmKernel>(theta, std::move(g));
}

inline std::pair<double, double> sample_pair(const DependenceKernel& kernel,
                                             const TailModel& f, RngStream& stream) {
    return kernel.sample_pair(f, stream);
}

/// E[h(Y)] by quadrature in the v = G(y) variable (exact substitution for
/// continuous G); Assumption B requires the value 1.
inline double kernel_normalization(const DependenceKernel& kernel) {
    const auto& g = *kernel.g();
    QuadResult q = integrate(
        [&](double v) { return kernel.h(g.quantile(v)); }, 1e-12, 1.0 - 1e-12, 1e-10);
    return q.value;
}

/// sup over the G-support grid of h(y); Assumption B requires finiteness.
inline double kernel_sup(const DependenceKernel& kernel, int grid_points = 1000) {
    const auto& g = *kernel.g();
    double sup = 0.0;
    for (int i = 1; i < grid_points; ++i) {
        const double y = g.quantile(static_cast<double>(i) / grid_points);
        sup = std::max(sup, kernel.h(y));
    }
    return sup;
}

/// Uniformity of Assumption B: per x, the sup over y_grid of
/// |conditional_tail(x,y) / (h(y) F_bar(x)) - 1|; must decay to 0 in x.
inline RatioCurve verify_assumption_B(const DependenceKernel& kernel, const TailModel& f,
                                      const std::vector<double>& x_grid,
                                      const std::vector<double>& y_grid) {
    RatioCurve c;
    c.id = "assumption_B_sup_deviation";
    c.xs = x_grid;
    for (double x : x_grid) {
        const double fbar = f.tail(x);
        double sup = 0.0;
        for (double y : y_grid) {
            const double hy = kernel.h(y);
            if (hy <= 1e-12) continue;  // kernel vanishes: y outside the uniformity set
            sup = std::max(sup, std::fabs(kernel.conditional_tail(f, x, y) / (hy * fbar) - 1.0));
        }
        c.log_values.push_back(std::log(sup));
    }
    detail::finalize_curve(c);
    return c;
}

struct AssumptionAReport {
    Verdict verdict = Verdict::inconclusive;
    std::vector<RatioCurve> curves;
    std::string note;
};

/// Assumption A: G_bar(c x) = o(H_bar(x)) for every c > 0, probed on c_grid.
/// h_model is the reference tail (typically the product tail H).
inline AssumptionAReport verify_assumption_A(const TailModel& g, const TailModel& h_model,
                                             const std::vector<double>& c_grid,
                                             const std::vector<double>& x_grid,
                                             const Tolerances& tol = {}) {
    AssumptionAReport report;
    if (std::isfinite(g.support_right())) {
        report.verdict = Verdict::holds;
        report.note = "G has a finite right endpoint: G_bar(cx) vanishes identically";
        return report;
    }
    bool all_decay = true, any_stuck = false;
    for (double c : c_grid) {
        RatioCurve curve;
        curve.id = "assumption_A(c=" + std::to_string(c) + ")";
        curve.xs = x_grid;
        for (double x : x_grid)
            curve.log_values.push_back(g.log_tail(c * x) - h_model.log_tail(x));
        detail::finalize_curve(curve);
        double top = 0.0;
        const double cut = curve.xs.back() / 10.0;
        for (std::size_t i = 0; i < curve.xs.size(); ++i)
            if (curve.xs[i] >= cut) top = std::max(top, curve.values[i]);
        const bool decays = top < tol.decay_tol && curve.slope < 0.0;
        const bool stuck = std::fabs(curve.slope) <= tol.slope_flat || curve.slope > 0.0;
        all_decay = all_decay && decays;
        any_stuck = any_stuck || (!decays && stuck);
        report.curves.push_back(std::move(curve));
    }
    report.verdict = all_decay ? Verdict::holds
                               : (any_stuck ? Verdict::fails : Verdict::inconclusive);
    return report;
}

}  // namespace heavytail
