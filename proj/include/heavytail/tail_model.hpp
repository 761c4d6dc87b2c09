// Parametric univariate tail models: exact tails, quantiles, samplers,
// integrated tails, independent convolution and pointwise mixtures.
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "heavytail/quadrature.hpp"
#include "heavytail/rng.hpp"
#include "heavytail/special.hpp"

namespace heavytail {

/// Immutable univariate distribution exposed through its tail function.
/// All operations are pure; instances may be shared across workers.
class TailModel {
public:
    virtual ~TailModel() = default;

    /// F_bar(x) = P[X > x], clamped to [0,1].
    virtual double tail(double x) const = 0;

    /// log F_bar(x); overridden where the closed form avoids underflow.
    virtual double log_tail(double x) const {
        const double t = tail(x);
        return t > 0.0 ? std::log(t) : -inf;
    }

    /// Inverse cdf at u in (0,1). Default: monotone bisection on tail().
    virtual double quantile(double u) const;

    /// E[X]; +inf for infinite-mean models. Default integrates the tail
    /// (valid for non-negative support).
    virtual double mean() const;

    virtual double support_left() const { return 0.0; }
    virtual double support_right() const { return inf; }

    virtual double sample(RngStream& stream) const { return quantile(stream.next_uniform()); }

    virtual std::string name() const = 0;

    /// True when tail()/quantile() are closed-form (stderr-free diagnostics).
    virtual bool analytic() const { return true; }
};

using ModelPtr = std::shared_ptr<const TailModel>;

inline double TailModel::quantile(double u) const {
    if (!(u > 0.0) || !(u < 1.0)) throw std::domain_error("quantile: u outside (0,1)");
    const double target = 1.0 - u;  // find smallest x with tail(x) <= target
    double lo = support_left();
    if (!std::isfinite(lo)) lo = -1.0;
    if (tail(lo) <= target) return lo;
    double hi = std::max(std::fabs(lo), 1.0);
    while (tail(hi) > target) {
        hi *= 2.0;
        if (hi > 1e300) return inf;
    }
    if (!std::isfinite(lo)) {
        lo = -1.0;
        while (tail(lo) <= target) lo *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (tail(mid) <= target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

inline double TailModel::mean() const {
    if (support_left() < 0.0)
        throw std::domain_error("mean: default integration requires non-negative support");
    const double hi = std::isfinite(support_right()) ? support_right() : quantile(1.0 - 1e-13);
    if (!std::isfinite(hi)) return inf;
    QuadResult head = integrate([this](double y) { return tail(y); }, 0.0,
                                std::min(hi, 1.0), 1e-10);
    QuadResult rest = hi > 1.0
                          ? integrate_tail([this](double y) { return tail(y); }, 1.0, hi, 1e-10)
                          : QuadResult{};
    return head.value + rest.value;
}

// ---------------------------------------------------------------------------
// Families

class Pareto final : public TailModel {
public:
    Pareto(double alpha, double xm) : alpha_(alpha), xm_(xm) {
        if (!(alpha > 0.0) || !(xm > 0.0)) throw std::invalid_argument("Pareto: alpha,xm > 0");
    }
    double tail(double x) const override { return x <= xm_ ? 1.0 : std::pow(xm_ / x, alpha_); }
    double log_tail(double x) const override {
        return x <= xm_ ? 0.0 : alpha_ * std::log(xm_ / x);
    }
    double quantile(double u) const override {
        if (!(u > 0.0) || !(u < 1.0)) throw std::domain_error("quantile: u outside (0,1)");
        return xm_ * std::pow(1.0 - u, -1.0 / alpha_);
    }
    double mean() const override { return alpha_ > 1.0 ? alpha_ * xm_ / (alpha_ - 1.0) : inf; }
    double support_left() const override { return xm_; }
    std::string name() const override {
        return "pareto(" + std::to_string(alpha_) + "," + std::to_string(xm_) + ")";
    }
    double alpha() const { return alpha_; }
    double xm() const { return xm_; }

private:
    double alpha_, xm_;
};

class Exponential final : public TailModel {
public:
    explicit Exponential(double rate) : rate_(rate) {
        if (!(rate > 0.0)) throw std::invalid_argument("Exponential: rate > 0");
    }
    double tail(double x) const override { return x <= 0.0 ? 1.0 : std::exp(-rate_ * x); }
    double log_tail(double x) const override { return x <= 0.0 ? 0.0 : -rate_ * x; }
    double quantile(double u) const override {
        if (!(u > 0.0) || !(u < 1.0)) throw std::domain_error("quantile: u outside (0,1)");
        return -std::log1p(-u) / rate_;
    }
    double mean() const override { return 1.0 / rate_; }
    std::string name() const override { return "exponential(" + std::to_string(rate_) + ")"; }
    double rate() const { return rate_; }

private:
    double rate_;
};

/// Tail exp(-lambda x^tau); heavy for tau in (0,1).
class Weibull final : public TailModel {
public:
    Weibull(double tau, double lambda) : tau_(tau), lambda_(lambda) {
        if (!(tau > 0.0) || tau > 1.0 || !(lambda > 0.0))
            throw std::invalid_argument("Weibull: tau in (0,1], lambda > 0");
    }
    double tail(double x) const override {
        return x <= 0.0 ? 1.0 : std::exp(-lambda_ * std::pow(x, tau_));
    }
    double log_tail(double x) const override {
        return x <= 0.0 ? 0.0 : -lambda_ * std::pow(x, tau_);
    }
    double quantile(double u) const override {
        if (!(u > 0.0) || !(u < 1.0)) throw std::domain_error("quantile: u outside (0,1)");
        return std::pow(-std::log1p(-u) / lambda_, 1.0 / tau_);
    }
    double mean() const override {
        return std::pow(lambda_, -1.0 / tau_) * std::tgamma(1.0 + 1.0 / tau_);
    }
    std::string name() const override {
        return "weibull(" + std::to_string(tau_) + "," + std::to_string(lambda_) + ")";
    }

private:
    double tau_, lambda_;
};

class Lognormal final : public TailModel {
public:
    Lognormal(double mu, double sigma) : mu_(mu), sigma_(sigma) {
        if (!(sigma > 0.0)) throw std::invalid_argument("Lognormal: sigma > 0");
    }
    double tail(double x) const override {
        return x <= 0.0 ? 1.0 : normal_tail((std::log(x) - mu_) / sigma_);
    }
    double log_tail(double x) const override {
        return x <= 0.0 ? 0.0 : log_normal_tail((std::log(x) - mu_) / sigma_);
    }
    double quantile(double u) const override {
        return std::exp(mu_ + sigma_ * normal_quantile(u));
    }
    double mean() const override { return std::exp(mu_ + 0.5 * sigma_ * sigma_); }
    std::string name() const override {
        return "lognormal(" + std::to_string(mu_) + "," + std::to_string(sigma_) + ")";
    }

private:
    double mu_, sigma_;
};

class UniformPos final : public TailModel {
public:
    UniformPos(double lo, double hi) : lo_(lo), hi_(hi) {
        if (!(lo >= 0.0) || !(hi > lo)) throw std::invalid_argument("UniformPos: 0 <= lo < hi");
    }
    double tail(double x) const override {
        if (x <= lo_) return 1.0;
        if (x >= hi_) return 0.0;
        return (hi_ - x) / (hi_ - lo_);
    }
    double quantile(double u) const override {
        if (!(u > 0.0) || !(u < 1.0)) throw std::domain_error("quantile: u outside (0,1)");
        return lo_ + u * (hi_ - lo_);
    }
    double mean() const override { return 0.5 * (lo_ + hi_); }
    double support_left() const override { return lo_; }
    double support_right() const override { return hi_; }
    std::string name() const override {
        return "uniform(" + std::to_string(lo_) + "," + std::to_string(hi_) + ")";
    }

private:
    double lo_, hi_;
};

class PointMass final : public TailModel {
public:
    explicit PointMass(double c) : c_(c) {
        if (!(c >= 0.0)) throw std::invalid_argument("PointMass: c >= 0");
    }
    double tail(double x) const override { return x < c_ ? 1.0 : 0.0; }
    double quantile(double u) const override {
        if (!(u > 0.0) || !(u < 1.0)) throw std::domain_error("quantile: u outside (0,1)");
        return c_;
    }
    double mean() const override { return c_; }
    double support_left() const override { return c_; }
    double support_right() const override { return c_; }
    std::string name() const override { return "pointmass(" + std::to_string(c_) + ")"; }

private:
    double c_;
};

/// Two-component mixture with exact pointwise tail p*left + (1-p)*right.
class Mixture final : public TailModel {
public:
    Mixture(double p, ModelPtr left, ModelPtr right)
        : p_(p), left_(std::move(left)), right_(std::move(right)) {
        if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("Mixture: p in (0,1)");
        if (!left_ || !right_) throw std::invalid_argument("Mixture: null component");
    }
    double tail(double x) const override {
        return p_ * left_->tail(x) + (1.0 - p_) * right_->tail(x);
    }
    double log_tail(double x) const override {
        const double la = std::log(p_) + left_->log_tail(x);
        const double lb = std::log1p(-p_) + right_->log_tail(x);
        const double m = std::max(la, lb);
        if (m == -inf) return -inf;
        return m + std::log(std::exp(la - m) + std::exp(lb - m));
    }
    double mean() const override { return p_ * left_->mean() + (1.0 - p_) * right_->mean(); }
    double support_left() const override {
        return std::min(left_->support_left(), right_->support_left());
    }
    double support_right() const override {
        return std::max(left_->support_right(), right_->support_right());
    }
    double sample(RngStream& stream) const override {
        return stream.next_uniform() < p_ ? left_->sample(stream) : right_->sample(stream);
    }
    bool analytic() const override { return left_->analytic() && right_->analytic(); }
    std::string name() const override {
        return "mixture(" + std::to_string(p_) + "," + left_->name() + "," + right_->name() + ")";
    }
    double p() const { return p_; }
    const ModelPtr& left() const { return left_; }
    const ModelPtr& right() const { return right_; }

private:
    double p_;
    ModelPtr left_, right_;
};

/// X - c for c >= 0; lets whole-real-axis statements run on shifted
/// non-negative bases.
class Shifted final : public TailModel {
public:
    Shifted(ModelPtr base, double c) : base_(std::move(base)), c_(c) {
        if (!base_ || !(c >= 0.0)) throw std::invalid_argument("Shifted: base and c >= 0");
    }
    double tail(double x) const override { return base_->tail(x + c_); }
    double log_tail(double x) const override { return base_->log_tail(x + c_); }
    double quantile(double u) const override { return base_->quantile(u) - c_; }
    double mean() const override { return base_->mean() - c_; }
    double support_left() const override { return base_->support_left() - c_; }
    double support_right() const override { return base_->support_right() - c_; }
    double sample(RngStream& stream) const override { return base_->sample(stream) - c_; }
    bool analytic() const override { return base_->analytic(); }
    std::string name() const override {
        return "shifted(" + base_->name() + "," + std::to_string(c_) + ")";
    }

private:
    ModelPtr base_;
    double c_;
};

/// theta * X for theta > 0 (common-factor marginals, deterministic discounting).
class Scaled final : public TailModel {
public:
    Scaled(ModelPtr base, double theta) : base_(std::move(base)), theta_(theta) {
        if (!base_ || !(theta > 0.0)) throw std::invalid_argument("Scaled: base and theta > 0");
    }
    double tail(double x) const override { return base_->tail(x / theta_); }
    double log_tail(double x) const override { return base_->log_tail(x / theta_); }
    double quantile(double u) const override { return theta_ * base_->quantile(u); }
    double mean() const override { return theta_ * base_->mean(); }
    double support_left() const override { return theta_ * base_->support_left(); }
    double support_right() const override { return theta_ * base_->support_right(); }
    double sample(RngStream& stream) const override { return theta_ * base_->sample(stream); }
    bool analytic() const override { return base_->analytic(); }
    std::string name() const override {
        return "scaled(" + base_->name() + "," + std::to_string(theta_) + ")";
    }

private:
    ModelPtr base_;
    double theta_;
};

/// max(X, 0) restriction F+; subexponential checks on real-axis models run
/// through this.
class PositivePart final : public TailModel {
public:
    explicit PositivePart(ModelPtr base) : base_(std::move(base)) {
        if (!base_) throw std::invalid_argument("PositivePart: null base");
    }
    double tail(double x) const override { return x < 0.0 ? 1.0 : base_->tail(x); }
    double log_tail(double x) const override { return x < 0.0 ? 0.0 : base_->log_tail(x); }
    double mean() const override {
        return integrate_tail([this](double y) { return tail(y); }, 0.0,
                              quantile(1.0 - 1e-13), 1e-10)
                   .value +
               integrate([this](double y) { return tail(y); }, 0.0, 1e-12).value;
    }
    double support_left() const override { return 0.0; }
    double support_right() const override { return base_->support_right(); }
    double sample(RngStream& stream) const override {
        return std::max(base_->sample(stream), 0.0);
    }
    bool analytic() const override { return base_->analytic(); }
    std::string name() const override { return "positive_part(" + base_->name() + ")"; }

private:
    ModelPtr base_;
};

// ---------------------------------------------------------------------------
// Factories

inline ModelPtr pareto(double alpha, double xm) { return std::make_shared<Pareto>(alpha, xm); }
inline ModelPtr exponential(double rate) { return std::make_shared<Exponential>(rate); }
inline ModelPtr weibull(double tau, double lambda) {
    return std::make_shared<Weibull>(tau, lambda);
}
inline ModelPtr lognormal(double mu, double sigma) {
    return std::make_shared<Lognormal>(mu, sigma);
}
inline ModelPtr uniform_pos(double lo, double hi) {
    return std::make_shared<UniformPos>(lo, hi);
}
inline ModelPtr point_mass(double c) { return std::make_shared<PointMass>(c); }
inline ModelPtr mixture(double p, ModelPtr f, ModelPtr g) {
    return std::make_shared<Mixture>(p, std::move(f), std::move(g));
}
inline ModelPtr shifted(ModelPtr base, double c) {
    return std::make_shared<Shifted>(std::move(base), c);
}
inline ModelPtr scaled(ModelPtr base, double theta) {
    return std::make_shared<Scaled>(std::move(base), theta);
}
inline ModelPtr positive_part(ModelPtr base) {
    return std::make_shared<PositivePart>(std::move(base));
}

// ---------------------------------------------------------------------------
// Operations

/// Integrated-tail distribution tail F_bar_I(x) = (1/E[X]) ∫_x^∞ F_bar(y) dy.
/// Closed form for Pareto and Exponential; adaptive quadrature otherwise
/// (relative error <= 1e-8). Requires non-negative support and finite mean.
inline double integrated_tail(const TailModel& model, double x) {
    if (model.support_left() < 0.0)
        throw std::domain_error("integrated_tail: support must be non-negative");
    const double m = model.mean();
    if (!(m > 0.0) || !std::isfinite(m))
        throw std::domain_error("integrated_tail: requires positive finite mean");
    if (x <= 0.0) return 1.0;

    if (const auto* p = dynamic_cast<const Pareto*>(&model)) {
        const double a = p->alpha(), xm = p->xm();
        const double upper = x <= xm
                                 ? (xm - x) + xm / (a - 1.0)
                                 : std::pow(xm, a) * std::pow(x, 1.0 - a) / (a - 1.0);
        return upper / m;
    }
    if (const auto* e = dynamic_cast<const Exponential*>(&model)) {
        return std::exp(-e->rate() * x);
    }
    const double hi = std::isfinite(model.support_right()) ? model.support_right()
                                                           : model.quantile(1.0 - 1e-14);
    if (x >= hi) return 0.0;
    QuadResult q = integrate_tail([&model](double y) { return model.tail(y); }, x, hi, 1e-9);
    return std::clamp(q.value / m, 0.0, 1.0);
}

/// P[X1 + X2 > x] for independent X1 ~ f, X2 ~ g, both non-negative:
/// F_bar(x) + ∫_0^{F(x)} G_bar(x - Q_f(u)) du on the quantile grid.
inline double convolve_tail(const TailModel& f, const TailModel& g, double x,
                            bool* budget_ok = nullptr) {
    if (f.support_left() < 0.0 || g.support_left() < 0.0)
        throw std::domain_error("convolve_tail: models must be non-negative");
    if (budget_ok) *budget_ok = true;
    if (x <= 0.0) return 1.0;
    const double fx = f.tail(x);
    // F(x), kept strictly below 1 so quantile nodes stay in the open interval
    // when fx underflows; callers needing resolved tails should keep fx >= ~1e-12.
    const double ub = std::min(1.0 - fx, 1.0 - 1e-15);
    if (ub <= 0.0) return 1.0;
    auto integrand = [&](double u) { return g.tail(x - f.quantile(u)); };
    // refine near u -> F(x), where Q_f(u) -> x and the integrand peaks
    std::vector<double> breaks{1e-12};
    for (double eps : {0.5, 0.2, 0.1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10}) {
        const double b = ub * (1.0 - eps);
        if (b > breaks.back()) breaks.push_back(b);
    }
    breaks.push_back(ub);
    QuadResult q = integrate_panels(integrand, breaks, 1e-8);
    if (budget_ok) *budget_ok = q.converged;
    return std::clamp(fx + q.value, 0.0, 1.0);
}

/// n i.i.d. draws, reproducible given (seed, stream id).
inline std::vector<double> sample(const TailModel& model, RngStream& stream, std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = model.sample(stream);
    return out;
}

}  // namespace heavytail
