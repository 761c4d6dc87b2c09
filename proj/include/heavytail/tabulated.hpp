// Log-log interpolation cache over a model's tail, for hot paths
// (convolution checks, repeated quantile inversions) on quadrature-backed models.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "heavytail/tail_model.hpp"

namespace heavytail {

/// Piecewise-linear interpolant of log F_bar against log x on a geometric grid
/// spanning [max(support_left, q(1e-7)), q(1-1e-12)]. Outside the table the
/// tail is clamped (1 below, extrapolated slope above).
class TabulatedTail final : public TailModel {
public:
    explicit TabulatedTail(ModelPtr base, int points = 1200) : base_(std::move(base)) {
        double lo = base_->support_left();
        if (!(lo > 0.0)) lo = std::max(base_->quantile(1e-7), 1e-12);
        double hi = base_->quantile(1.0 - 1e-12);
        if (!(hi > lo)) hi = lo * 2.0;
        log_x_.resize(static_cast<std::size_t>(points));
        log_t_.resize(static_cast<std::size_t>(points));
        const double la = std::log(lo), lb = std::log(hi);
        for (int i = 0; i < points; ++i) {
            const double lx = la + (lb - la) * i / (points - 1);
            log_x_[static_cast<std::size_t>(i)] = lx;
            log_t_[static_cast<std::size_t>(i)] = base_->log_tail(std::exp(lx));
        }
        // enforce monotone non-increasing stored tails
        for (std::size_t i = 1; i < log_t_.size(); ++i)
            log_t_[i] = std::min(log_t_[i], log_t_[i - 1]);
    }

    double tail(double x) const override { return std::exp(log_tail(x)); }

    double log_tail(double x) const override {
        if (x <= 0.0 || std::log(x) <= log_x_.front()) {
            return x < base_->support_left() ? 0.0 : std::min(0.0, log_t_.front());
        }
        const double lx = std::log(x);
        if (lx >= log_x_.back()) {
            // extrapolate with the last segment's slope
            const std::size_t n = log_x_.size();
            const double s = (log_t_[n - 1] - log_t_[n - 2]) / (log_x_[n - 1] - log_x_[n - 2]);
            return log_t_[n - 1] + s * (lx - log_x_[n - 1]);
        }
        const auto it = std::upper_bound(log_x_.begin(), log_x_.end(), lx);
        const std::size_t i = static_cast<std::size_t>(it - log_x_.begin());
        const double w = (lx - log_x_[i - 1]) / (log_x_[i] - log_x_[i - 1]);
        return log_t_[i - 1] + w * (log_t_[i] - log_t_[i - 1]);
    }

    double quantile(double u) const override {
        if (!(u > 0.0) || !(u < 1.0)) throw std::domain_error("quantile: u outside (0,1)");
        const double target = std::log1p(-u);
        if (target >= log_t_.front()) return std::exp(log_x_.front());
        if (target <= log_t_.back()) {
            const std::size_t n = log_x_.size();
            const double s = (log_t_[n - 1] - log_t_[n - 2]) / (log_x_[n - 1] - log_x_[n - 2]);
            return std::exp(log_x_[n - 1] + (target - log_t_[n - 1]) / s);
        }
        // log_t_ is non-increasing
        const auto it = std::lower_bound(log_t_.begin(), log_t_.end(), target,
                                         [](double a, double b) { return a > b; });
        const std::size_t i = static_cast<std::size_t>(it - log_t_.begin());
        if (i == 0) return std::exp(log_x_.front());
        const double denom = log_t_[i] - log_t_[i - 1];
        const double w = denom != 0.0 ? (target - log_t_[i - 1]) / denom : 1.0;
        return std::exp(log_x_[i - 1] + w * (log_x_[i] - log_x_[i - 1]));
    }

    double mean() const override { return base_->mean(); }
    double support_left() const override { return base_->support_left(); }
    double support_right() const override { return base_->support_right(); }
    double sample(RngStream& stream) const override { return base_->sample(stream); }
    bool analytic() const override { return false; }
    std::string name() const override { return "tabulated(" + base_->name() + ")"; }

private:
    ModelPtr base_;
    std::vector<double> log_x_, log_t_;
};

inline ModelPtr tabulated(ModelPtr base, int points = 1200) {
    return std::make_shared<TabulatedTail>(std::move(base), points);
}

}  // namespace heavytail
