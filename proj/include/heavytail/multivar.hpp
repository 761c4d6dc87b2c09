// Random vectors and joint tails F_bar(t,x) = P[X_1 > t_1 x, ..., X_n > t_n x]:
// the multivariate classes D_n (weak kernel) and PD_n (strong kernel), scalar
// products, vector sums with the proof's sandwich bounds, stopped sums,
// mixtures, and the MRV comparison.
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "heavytail/dependence.hpp"
#include "heavytail/diagnostics.hpp"
#include "heavytail/product.hpp"
#include "heavytail/risk.hpp"
#include "heavytail/tabulated.hpp"
#include "heavytail/tail_model.hpp"

namespace heavytail {

// ---------------------------------------------------------------------------
// Supporting univariate pieces

/// Finite mixture with arbitrarily many components (the binary Mixture in
/// dist_core nests awkwardly for spectral models).
class WeightedMixture final : public TailModel {
public:
    WeightedMixture(std::vector<double> weights, std::vector<ModelPtr> components)
        : w_(std::move(weights)), parts_(std::move(components)) {
        if (w_.size() != parts_.size() || w_.empty())
            throw std::invalid_argument("weighted_mixture: size mismatch");
        double sum = 0.0;
        for (double w : w_) {
            if (!(w >= 0.0)) throw std::invalid_argument("weighted_mixture: negative weight");
            sum += w;
        }
        if (std::fabs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("weighted_mixture: weights must sum to 1");
    }

    double tail(double x) const override {
        double t = 0.0;
        for (std::size_t i = 0; i < w_.size(); ++i) t += w_[i] * parts_[i]->tail(x);
        return t;
    }
    double log_tail(double x) const override {
        double best = -inf;
        std::vector<double> ls(w_.size(), -inf);
        for (std::size_t i = 0; i < w_.size(); ++i) {
            if (w_[i] == 0.0) continue;
            ls[i] = std::log(w_[i]) + parts_[i]->log_tail(x);
            best = std::max(best, ls[i]);
        }
        if (!std::isfinite(best)) return -inf;
        double acc = 0.0;
        for (double l : ls) acc += std::exp(l - best);
        return best + std::log(acc);
    }
    double support_left() const override {
        double lo = inf;
        for (const auto& p : parts_) lo = std::min(lo, p->support_left());
        return lo;
    }
    double support_right() const override {
        double hi = -inf;
        for (const auto& p : parts_) hi = std::max(hi, p->support_right());
        return hi;
    }
    double sample(RngStream& stream) const override {
        double u = stream.next_uniform();
        for (std::size_t i = 0; i + 1 < w_.size(); ++i) {
            if (u < w_[i]) return parts_[i]->sample(stream);
            u -= w_[i];
        }
        return parts_.back()->sample(stream);
    }
    bool analytic() const override {
        for (const auto& p : parts_)
            if (!p->analytic()) return false;
        return true;
    }
    std::string name() const override { return "weighted_mixture"; }

private:
    std::vector<double> w_;
    std::vector<ModelPtr> parts_;
};

inline ModelPtr weighted_mixture(std::vector<double> w, std::vector<ModelPtr> parts) {
    return std::make_shared<WeightedMixture>(std::move(w), std::move(parts));
}

/// Law of the independent sum of two models; tail by convolution quadrature.
class ConvolutionModel final : public TailModel {
public:
    ConvolutionModel(ModelPtr a, ModelPtr b) : a_(std::move(a)), b_(std::move(b)) {
        if (a_->support_left() < 0.0 || b_->support_left() < 0.0)
            throw std::domain_error("convolution model: non-negative summands only");
    }
    double tail(double x) const override { return convolve_tail(*a_, *b_, x); }
    double support_left() const override { return a_->support_left() + b_->support_left(); }
    double support_right() const override {
        return a_->support_right() + b_->support_right();
    }
    double sample(RngStream& stream) const override {
        return a_->sample(stream) + b_->sample(stream);
    }
    bool analytic() const override { return false; }
    std::string name() const override { return "sum(" + a_->name() + "," + b_->name() + ")"; }

private:
    ModelPtr a_, b_;
};

/// d-fold i.i.d. sum, tabulated stage by stage so the quadratures never nest.
inline ModelPtr iid_sum_model(const ModelPtr& m, int d) {
    if (d < 1) throw std::invalid_argument("iid_sum_model: d >= 1");
    ModelPtr acc = m;
    for (int k = 2; k <= d; ++k)
        acc = tabulated(std::make_shared<ConvolutionModel>(acc, m));
    return acc;
}

// ---------------------------------------------------------------------------
// Vector models

inline bool valid_t(const std::vector<double>& t) {
    bool any_finite = false;
    for (double ti : t) {
        if (!(ti > 0.0)) return false;
        if (std::isfinite(ti)) any_finite = true;
    }
    return any_finite;
}

class VectorModel {
public:
    virtual ~VectorModel() = default;
    virtual int dim() const = 0;
    virtual std::string kind() const = 0;
    virtual const std::vector<ModelPtr>& marginals() const = 0;
    /// true when joint_tail is exact (no MC needed)
    virtual bool analytic_joint() const = 0;
    virtual double joint_tail(const std::vector<double>& t, double x) const = 0;
    virtual double log_joint_tail(const std::vector<double>& t, double x) const {
        return std::log(joint_tail(t, x));
    }
    virtual std::vector<double> sample(RngStream& stream) const = 0;

protected:
    void require_t(const std::vector<double>& t) const {
        if (static_cast<int>(t.size()) != dim() || !valid_t(t))
            throw std::invalid_argument("joint_tail: invalid threshold vector t");
    }
};

using VecPtr = std::shared_ptr<const VectorModel>;

class IndependentComponents final : public VectorModel {
public:
    explicit IndependentComponents(std::vector<ModelPtr> marginals)
        : marg_(std::move(marginals)) {
        if (marg_.size() < 2) throw std::invalid_argument("vector: dim >= 2");
    }
    int dim() const override { return static_cast<int>(marg_.size()); }
    std::string kind() const override { return "independent_components"; }
    const std::vector<ModelPtr>& marginals() const override { return marg_; }
    bool analytic_joint() const override { return true; }
    double joint_tail(const std::vector<double>& t, double x) const override {
        return std::exp(log_joint_tail(t, x));
    }
    double log_joint_tail(const std::vector<double>& t, double x) const override {
        require_t(t);
        double l = 0.0;
        for (std::size_t i = 0; i < marg_.size(); ++i)
            if (std::isfinite(t[i])) l += marg_[i]->log_tail(t[i] * x);
        return l;
    }
    std::vector<double> sample(RngStream& stream) const override {
        std::vector<double> v(marg_.size());
        for (std::size_t i = 0; i < marg_.size(); ++i) v[i] = marg_[i]->sample(stream);
        return v;
    }

private:
    std::vector<ModelPtr> marg_;
};

/// X_i = theta_i R for one shared factor R: the joint tail is the single
/// probability R_bar(max_i t_i x / theta_i).
class CommonFactor final : public VectorModel {
public:
    CommonFactor(ModelPtr r, std::vector<double> weights)
        : r_(std::move(r)), theta_(std::move(weights)) {
        if (theta_.size() < 2) throw std::invalid_argument("vector: dim >= 2");
        for (double w : theta_)
            if (!(w > 0.0)) throw std::invalid_argument("common_factor: weights > 0");
        for (double w : theta_) marg_.push_back(scaled(r_, w));
    }
    int dim() const override { return static_cast<int>(theta_.size()); }
    std::string kind() const override { return "common_factor"; }
    const std::vector<ModelPtr>& marginals() const override { return marg_; }
    bool analytic_joint() const override { return true; }
    double joint_tail(const std::vector<double>& t, double x) const override {
        return std::exp(log_joint_tail(t, x));
    }
    double log_joint_tail(const std::vector<double>& t, double x) const override {
        require_t(t);
        double need = -inf;
        for (std::size_t i = 0; i < theta_.size(); ++i)
            if (std::isfinite(t[i])) need = std::max(need, t[i] * x / theta_[i]);
        return r_->log_tail(need);
    }
    std::vector<double> sample(RngStream& stream) const override {
        const double r = r_->sample(stream);
        std::vector<double> v(theta_.size());
        for (std::size_t i = 0; i < theta_.size(); ++i) v[i] = theta_[i] * r;
        return v;
    }
    const ModelPtr& factor() const { return r_; }

private:
    ModelPtr r_;
    std::vector<double> theta_;
    std::vector<ModelPtr> marg_;
};

/// Two components coupled by the FGM copula; survival form
/// P[X_1 > a, X_2 > b] = F1_bar(a) F2_bar(b) (1 + theta F1(a) F2(b)).
class FgmPair final : public VectorModel {
public:
    FgmPair(double theta, ModelPtr m1, ModelPtr m2)
        : kernel_(theta, m2), marg_{std::move(m1), ModelPtr()} {
        marg_[1] = kernel_.g();
    }
    int dim() const override { return 2; }
    std::string kind() const override { return "fgm_pair"; }
    const std::vector<ModelPtr>& marginals() const override { return marg_; }
    bool analytic_joint() const override { return true; }
    double joint_tail(const std::vector<double>& t, double x) const override {
        return std::exp(log_joint_tail(t, x));
    }
    double log_joint_tail(const std::vector<double>& t, double x) const override {
        require_t(t);
        if (!std::isfinite(t[0])) return marg_[1]->log_tail(t[1] * x);
        if (!std::isfinite(t[1])) return marg_[0]->log_tail(t[0] * x);
        const double l1 = marg_[0]->log_tail(t[0] * x), l2 = marg_[1]->log_tail(t[1] * x);
        const double f1 = 1.0 - std::exp(l1), f2 = 1.0 - std::exp(l2);
        return l1 + l2 + std::log1p(kernel_.theta() * f1 * f2);
    }
    std::vector<double> sample(RngStream& stream) const override {
        auto [x, y] = kernel_.sample_pair(*marg_[0], stream);
        return {x, y};
    }

private:
    FgmKernel kernel_;
    std::vector<ModelPtr> marg_;
};

/// MRV with a finite spectral set: X = R * d_k with R = Pareto(alpha, scale)
/// and direction d_k drawn with probability p_k. Joint tails are exact sums
/// over directions.
class MrvSpectral final : public VectorModel {
public:
    MrvSpectral(double alpha, double r_scale, std::vector<std::vector<double>> directions,
                std::vector<double> probs)
        : r_(pareto(alpha, r_scale)), dirs_(std::move(directions)), p_(std::move(probs)),
          alpha_(alpha) {
        if (dirs_.empty() || dirs_.size() != p_.size())
            throw std::invalid_argument("mrv: directions/probs mismatch");
        const std::size_t n = dirs_.front().size();
        if (n < 2) throw std::invalid_argument("vector: dim >= 2");
        double sum = 0.0;
        for (std::size_t k = 0; k < dirs_.size(); ++k) {
            if (dirs_[k].size() != n) throw std::invalid_argument("mrv: ragged directions");
            for (double d : dirs_[k])
                if (!(d >= 0.0)) throw std::invalid_argument("mrv: directions >= 0");
            if (!(p_[k] > 0.0)) throw std::invalid_argument("mrv: probs > 0");
            sum += p_[k];
        }
        if (std::fabs(sum - 1.0) > 1e-12) throw std::invalid_argument("mrv: probs sum to 1");
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<ModelPtr> parts;
            for (std::size_t k = 0; k < dirs_.size(); ++k)
                parts.push_back(dirs_[k][i] > 0.0 ? scaled(r_, dirs_[k][i])
                                                  : point_mass(0.0));
            marg_.push_back(weighted_mixture(p_, std::move(parts)));
        }
    }
    int dim() const override { return static_cast<int>(dirs_.front().size()); }
    std::string kind() const override { return "mrv_spectral"; }
    const std::vector<ModelPtr>& marginals() const override { return marg_; }
    bool analytic_joint() const override { return true; }
    double joint_tail(const std::vector<double>& t, double x) const override {
        return std::exp(log_joint_tail(t, x));
    }
    double log_joint_tail(const std::vector<double>& t, double x) const override {
        require_t(t);
        double best = -inf;
        std::vector<double> ls;
        for (std::size_t k = 0; k < dirs_.size(); ++k) {
            double need = -inf;
            bool hit = true;
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (!std::isfinite(t[i])) continue;
                if (dirs_[k][i] <= 0.0) {
                    hit = false;
                    break;
                }
                need = std::max(need, t[i] * x / dirs_[k][i]);
            }
            if (!hit) continue;
            const double l = std::log(p_[k]) + r_->log_tail(need);
            ls.push_back(l);
            best = std::max(best, l);
        }
        if (ls.empty() || !std::isfinite(best)) return -inf;
        double acc = 0.0;
        for (double l : ls) acc += std::exp(l - best);
        return best + std::log(acc);
    }
    std::vector<double> sample(RngStream& stream) const override {
        double u = stream.next_uniform();
        std::size_t k = p_.size() - 1;
        for (std::size_t i = 0; i + 1 < p_.size(); ++i) {
            if (u < p_[i]) {
                k = i;
                break;
            }
            u -= p_[i];
        }
        const double r = r_->sample(stream);
        std::vector<double> v(dirs_[k].size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = r * dirs_[k][i];
        return v;
    }
    double alpha() const { return alpha_; }
    bool positive_orthant_mass() const {
        for (std::size_t k = 0; k < dirs_.size(); ++k) {
            bool all = true;
            for (double d : dirs_[k]) all = all && d > 0.0;
            if (all) return true;
        }
        return false;
    }

private:
    ModelPtr r_;
    std::vector<std::vector<double>> dirs_;
    std::vector<double> p_;
    double alpha_;
    std::vector<ModelPtr> marg_;
};

/// Scalar product Y * X: joint tail ∫ h(y) F_bar(t, x/y) G(dy) by quadrature
/// in the G-quantile variable. Exact law for independent kernels; for
/// Assumption-B kernels this is the theorem's asymptotic representation.
class ScalarProductVector final : public VectorModel {
public:
    ScalarProductVector(VecPtr base, KernelPtr kernel)
        : base_(std::move(base)), kernel_(std::move(kernel)) {
        const auto& g = *kernel_->g();
        if (g.support_left() < 0.0 || g.tail(0.0) <= 0.0)
            throw std::domain_error("scalar_product: need Y >= 0 with G(0) < 1");
    }
    int dim() const override { return base_->dim(); }
    std::string kind() const override { return "scalar_product(" + base_->kind() + ")"; }
    const std::vector<ModelPtr>& marginals() const override {
        if (marg_.empty()) {
            for (const auto& m : base_->marginals())
                marg_.push_back(product_model(m, kernel_));
        }
        return marg_;
    }
    bool analytic_joint() const override { return base_->analytic_joint(); }
    double joint_tail(const std::vector<double>& t, double x) const override {
        require_t(t);
        const auto& g = *kernel_->g();
        auto integrand = [&](double v) {
            const double y = g.quantile(v);
            return kernel_->h(y) * base_->joint_tail(t, x / y);
        };
        QuadResult q = integrate_panels(integrand, detail::product_breaks(), 1e-9);
        return std::clamp(q.value, 0.0, 1.0);
    }
    std::vector<double> sample(RngStream& stream) const override {
        std::vector<double> v = base_->sample(stream);
        const double y = kernel_->g()->quantile(stream.next_uniform());
        for (double& vi : v) vi *= y;
        return v;
    }

private:
    VecPtr base_;
    KernelPtr kernel_;
    mutable std::vector<ModelPtr> marg_;
};

/// Componentwise sum of two independent vectors; joint tails by MC.
class VectorSum final : public VectorModel {
public:
    VectorSum(VecPtr a, VecPtr b) : a_(std::move(a)), b_(std::move(b)) {
        if (a_->dim() != b_->dim())
            throw std::invalid_argument("vector_sum: dimension mismatch");
        for (const auto& m : a_->marginals())
            if (m->support_left() < 0.0)
                throw std::domain_error("vector_sum: non-negative components only");
        for (const auto& m : b_->marginals())
            if (m->support_left() < 0.0)
                throw std::domain_error("vector_sum: non-negative components only");
    }
    int dim() const override { return a_->dim(); }
    std::string kind() const override { return "vector_sum"; }
    const std::vector<ModelPtr>& marginals() const override {
        if (marg_.empty()) {
            for (int i = 0; i < dim(); ++i)
                marg_.push_back(tabulated(std::make_shared<ConvolutionModel>(
                    a_->marginals()[static_cast<std::size_t>(i)],
                    b_->marginals()[static_cast<std::size_t>(i)])));
        }
        return marg_;
    }
    bool analytic_joint() const override { return false; }
    double joint_tail(const std::vector<double>&, double) const override {
        throw std::logic_error("vector_sum: joint tail requires MC (use mc_joint)");
    }
    std::vector<double> sample(RngStream& stream) const override {
        std::vector<double> v = a_->sample(stream), w = b_->sample(stream);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
        return v;
    }
    const VecPtr& first() const { return a_; }
    const VecPtr& second() const { return b_; }

private:
    VecPtr a_, b_;
    mutable std::vector<ModelPtr> marg_;
};

/// Randomly stopped sum of i.i.d. copies; N truncated and renormalized.
struct StoppingTime {
    std::vector<double> pmf;  // pmf[d] = P[N = d], d = 0..n_max
    double truncation_error = 0.0;

    void validate() const {
        if (pmf.empty() || pmf.size() > 21)
            throw std::invalid_argument("stopping time: support within 0..20");
        double sum = 0.0;
        for (double p : pmf) {
            if (!(p >= 0.0)) throw std::invalid_argument("stopping time: negative mass");
            sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("stopping time: pmf must sum to 1");
        if (pmf[0] >= 1.0 - 1e-12)
            throw std::invalid_argument("stopping time: P[N=0] < 1 required");
    }
};

inline StoppingTime fixed_stop(int n) {
    StoppingTime st;
    st.pmf.assign(static_cast<std::size_t>(n) + 1, 0.0);
    st.pmf.back() = 1.0;
    return st;
}

inline StoppingTime uniform_stop(const std::vector<int>& support) {
    StoppingTime st;
    int mx = 0;
    for (int d : support) mx = std::max(mx, d);
    st.pmf.assign(static_cast<std::size_t>(mx) + 1, 0.0);
    for (int d : support) st.pmf[static_cast<std::size_t>(d)] += 1.0 / support.size();
    return st;
}

/// Poisson(lambda) truncated at n_max with the tail mass renormalized in;
/// the discarded mass is reported as truncation_error.
inline StoppingTime poisson_stop(double lambda, int n_max) {
    StoppingTime st;
    double mass = 0.0, p = std::exp(-lambda);
    for (int d = 0; d <= n_max; ++d) {
        st.pmf.push_back(p);
        mass += p;
        p *= lambda / (d + 1);
    }
    st.truncation_error = 1.0 - mass;
    for (double& q : st.pmf) q /= mass;
    return st;
}

class StoppedSum final : public VectorModel {
public:
    StoppedSum(VecPtr m, StoppingTime n) : m_(std::move(m)), n_(std::move(n)) {
        n_.validate();
        if (n_.truncation_error > 1e-6)
            throw std::domain_error("stopped sum: stopping-time truncation error > 1e-6");
        for (const auto& marg : m_->marginals())
            if (marg->support_left() < 0.0)
                throw std::domain_error("stopped sum: non-negative components only");
    }
    int dim() const override { return m_->dim(); }
    std::string kind() const override { return "stopped_sum"; }
    const std::vector<ModelPtr>& marginals() const override {
        if (marg_.empty()) {
            for (const auto& base : m_->marginals()) {
                // d-fold sums share the (d-1)-fold prefix; tabulate each stage once
                std::vector<double> w;
                std::vector<ModelPtr> parts;
                ModelPtr acc = base;
                for (std::size_t d = 0; d < n_.pmf.size(); ++d) {
                    if (d >= 2)
                        acc = tabulated(std::make_shared<ConvolutionModel>(acc, base));
                    if (n_.pmf[d] <= 0.0) continue;
                    w.push_back(n_.pmf[d]);
                    parts.push_back(d == 0 ? point_mass(0.0) : acc);
                }
                marg_.push_back(weighted_mixture(std::move(w), std::move(parts)));
            }
        }
        return marg_;
    }
    bool analytic_joint() const override { return false; }
    double joint_tail(const std::vector<double>&, double) const override {
        throw std::logic_error("stopped_sum: joint tail requires MC (use mc_joint)");
    }
    std::vector<double> sample(RngStream& stream) const override {
        double u = stream.next_uniform();
        std::size_t d = n_.pmf.size() - 1;
        for (std::size_t i = 0; i + 1 < n_.pmf.size(); ++i) {
            if (u < n_.pmf[i]) {
                d = i;
                break;
            }
            u -= n_.pmf[i];
        }
        std::vector<double> acc(static_cast<std::size_t>(dim()), 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            std::vector<double> v = m_->sample(stream);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
        }
        return acc;
    }
    const VecPtr& base() const { return m_; }
    const StoppingTime& stopping() const { return n_; }

private:
    VecPtr m_;
    StoppingTime n_;
    mutable std::vector<ModelPtr> marg_;
};

class VectorMixture final : public VectorModel {
public:
    VectorMixture(VecPtr a, VecPtr b, double p) : a_(std::move(a)), b_(std::move(b)), p_(p) {
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("vector_mixture: p in (0,1)");
        if (a_->dim() != b_->dim())
            throw std::invalid_argument("vector_mixture: dimension mismatch");
        for (int i = 0; i < a_->dim(); ++i)
            marg_.push_back(mixture(p_, a_->marginals()[static_cast<std::size_t>(i)],
                                    b_->marginals()[static_cast<std::size_t>(i)]));
    }
    int dim() const override { return a_->dim(); }
    std::string kind() const override { return "vector_mixture"; }
    const std::vector<ModelPtr>& marginals() const override { return marg_; }
    bool analytic_joint() const override {
        return a_->analytic_joint() && b_->analytic_joint();
    }
    double joint_tail(const std::vector<double>& t, double x) const override {
        return p_ * a_->joint_tail(t, x) + (1.0 - p_) * b_->joint_tail(t, x);
    }
    double log_joint_tail(const std::vector<double>& t, double x) const override {
        const double la = std::log(p_) + a_->log_joint_tail(t, x);
        const double lb = std::log1p(-p_) + b_->log_joint_tail(t, x);
        const double m = std::max(la, lb);
        if (!std::isfinite(m)) return -inf;
        return m + std::log(std::exp(la - m) + std::exp(lb - m));
    }
    std::vector<double> sample(RngStream& stream) const override {
        return stream.next_uniform() < p_ ? a_->sample(stream) : b_->sample(stream);
    }

private:
    VecPtr a_, b_;
    double p_;
    std::vector<ModelPtr> marg_;
};

// factories
inline VecPtr independent_components(std::vector<ModelPtr> m) {
    return std::make_shared<IndependentComponents>(std::move(m));
}
inline VecPtr common_factor(ModelPtr r, std::vector<double> w) {
    return std::make_shared<CommonFactor>(std::move(r), std::move(w));
}
inline VecPtr fgm_pair(double theta, ModelPtr m1, ModelPtr m2) {
    return std::make_shared<FgmPair>(theta, std::move(m1), std::move(m2));
}
inline VecPtr scalar_product(VecPtr base, KernelPtr kernel) {
    return std::make_shared<ScalarProductVector>(std::move(base), std::move(kernel));
}
inline VecPtr vector_sum(VecPtr a, VecPtr b) {
    return std::make_shared<VectorSum>(std::move(a), std::move(b));
}
inline VecPtr stopped_vector_sum(VecPtr m, StoppingTime n) {
    return std::make_shared<StoppedSum>(std::move(m), std::move(n));
}
inline VecPtr vector_mixture(VecPtr a, VecPtr b, double p) {
    return std::make_shared<VectorMixture>(std::move(a), std::move(b), p);
}
inline std::shared_ptr<const MrvSpectral> mrv_model(double alpha, double r_scale,
                                                    std::vector<std::vector<double>> dirs,
                                                    std::vector<double> probs) {
    return std::make_shared<MrvSpectral>(alpha, r_scale, std::move(dirs), std::move(probs));
}

/// Univariate view x -> joint_tail(t, x) of an analytic joint, so univariate
/// diagnostics (Assumption A, grids) run on joint tails directly.
class JointSlice final : public TailModel {
public:
    JointSlice(VecPtr m, std::vector<double> t) : m_(std::move(m)), t_(std::move(t)) {
        if (!m_->analytic_joint())
            throw std::invalid_argument("joint slice: analytic joints only");
        if (!valid_t(t_)) throw std::invalid_argument("joint slice: invalid t");
    }
    double tail(double x) const override { return m_->joint_tail(t_, x); }
    double log_tail(double x) const override { return m_->log_joint_tail(t_, x); }
    double support_left() const override { return 0.0; }
    double sample(RngStream&) const override {
        throw std::logic_error("joint slice: not samplable");
    }
    bool analytic() const override { return false; }
    std::string name() const override { return "joint_slice(" + m_->kind() + ")"; }

private:
    VecPtr m_;
    std::vector<double> t_;
};

inline bool identical_marginals(const VectorModel& m) {
    for (std::size_t i = 1; i < m.marginals().size(); ++i)
        if (m.marginals()[i]->name() != m.marginals()[0]->name()) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Joint-tail estimation

struct JointEstimate {
    std::vector<double> est, se;
    std::vector<std::size_t> hits;
};

namespace detail {

// exceedance level of the reduced variable: joint event {X_i > t_i x for all
// finite t_i} equals {min_i X_i / t_i > x}
inline double min_reduced(const std::vector<double>& v, const std::vector<double>& t) {
    double mn = inf;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (std::isfinite(t[i])) mn = std::min(mn, v[i] / t[i]);
    return mn;
}

}  // namespace detail

/// MC joint tail along x_grid for fixed t, via the min-reduction
/// P[X_i > t_i x for all i] = P[min_i X_i / t_i > x]. Stopped sums use the
/// shared-path estimator sum_d p_d 1[S_d exceeds] on one draw of n_max terms.
inline JointEstimate mc_joint(const VectorModel& m, const std::vector<double>& t,
                              const std::vector<double>& x_grid, std::size_t n_samples,
                              std::uint64_t seed, int workers = 1) {
    if (!valid_t(t) || static_cast<int>(t.size()) != m.dim())
        throw std::invalid_argument("mc_joint: invalid t");
    const std::size_t nx = x_grid.size();
    struct Acc {
        std::vector<double> w, wsq;
        std::vector<std::size_t> raw;
    };
    std::vector<Acc> per_worker(static_cast<std::size_t>(workers),
                                {std::vector<double>(nx, 0.0), std::vector<double>(nx, 0.0),
                                 std::vector<std::size_t>(nx, 0)});
    const std::size_t step =
        (n_samples + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
    const auto* ss = dynamic_cast<const StoppedSum*>(&m);

    detail::run_paths(seed, n_samples, workers, [&](std::size_t p, RngStream& ps) {
        Acc& a = per_worker[std::min(p / step, static_cast<std::size_t>(workers) - 1)];
        if (!ss) {
            const double mn = detail::min_reduced(m.sample(ps), t);
            const std::size_t k = detail::hits_below(x_grid, mn);
            for (std::size_t j = 0; j < k; ++j) {
                a.w[j] += 1.0;
                a.wsq[j] += 1.0;
                ++a.raw[j];
            }
            return;
        }
        // one path of n_max summands, weighted over all stopping values d
        const auto& pmf = ss->stopping().pmf;
        std::vector<double> acc(static_cast<std::size_t>(m.dim()), 0.0);
        std::vector<std::size_t> kd(pmf.size(), 0);  // hit index per d
        for (std::size_t d = 1; d < pmf.size(); ++d) {
            std::vector<double> v = ss->base()->sample(ps);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
            kd[d] = detail::hits_below(x_grid, detail::min_reduced(acc, t));
        }
        const std::size_t kmax = kd.back();
        if (kmax == 0) return;
        for (std::size_t j = 0; j < kmax; ++j) {
            double wj = 0.0;
            for (std::size_t d = 1; d < pmf.size(); ++d)
                if (kd[d] > j) wj += pmf[d];
            a.w[j] += wj;
            a.wsq[j] += wj * wj;
            ++a.raw[j];
        }
    });

    JointEstimate out;
    for (std::size_t j = 0; j < nx; ++j) {
        double sw = 0.0, swsq = 0.0;
        std::size_t c = 0;
        for (const auto& a : per_worker) {
            sw += a.w[j];
            swsq += a.wsq[j];
            c += a.raw[j];
        }
        const double n = static_cast<double>(n_samples);
        const double mean = sw / n;
        out.est.push_back(mean);
        out.se.push_back(std::sqrt(std::max(swsq / n - mean * mean, 0.0) / n));
        out.hits.push_back(c);
    }
    return out;
}

/// Joint tail with stderr: exact (se = 0) for analytic joints, MC otherwise.
inline std::pair<double, double> joint_tail(const VectorModel& m,
                                            const std::vector<double>& t, double x,
                                            std::size_t n_samples = 1000000,
                                            std::uint64_t seed = 1, int workers = 1) {
    if (m.analytic_joint()) return {m.joint_tail(t, x), 0.0};
    JointEstimate e = mc_joint(m, t, {x}, n_samples, seed, workers);
    return {e.est.front(), e.se.front()};
}

// ---------------------------------------------------------------------------
// Multivariate class checks

struct McOpts {
    std::size_t n_samples = 0;  // 0 = analytic only
    std::uint64_t seed = 1;
    int workers = 1;
    std::size_t min_hits = 50;
};

struct VectorClassReport {
    Verdict verdict = Verdict::inconclusive;
    std::string note;
    std::vector<RatioCurve> evidence;
};

inline std::vector<std::vector<double>> default_t_grid(int n) {
    std::vector<std::vector<double>> out;
    out.push_back(std::vector<double>(static_cast<std::size_t>(n), 1.0));
    out.push_back(std::vector<double>(static_cast<std::size_t>(n), 0.5));
    out.push_back(std::vector<double>(static_cast<std::size_t>(n), 2.0));
    {
        std::vector<double> mixed(static_cast<std::size_t>(n), 1.0);
        mixed[0] = 0.5;
        mixed[static_cast<std::size_t>(n) - 1] = 2.0;
        out.push_back(mixed);
    }
    {
        std::vector<double> drop(static_cast<std::size_t>(n), 1.0);
        drop[static_cast<std::size_t>(n) - 1] = inf;
        out.push_back(drop);
    }
    return out;
}

inline std::vector<std::vector<double>> default_b_grid(int n) {
    std::vector<std::vector<double>> out;
    out.push_back(std::vector<double>(static_cast<std::size_t>(n), 0.5));
    out.push_back(std::vector<double>(static_cast<std::size_t>(n), 0.8));
    {
        std::vector<double> mixed(static_cast<std::size_t>(n), 0.8);
        mixed[0] = 0.5;
        out.push_back(mixed);
    }
    return out;
}

inline std::vector<std::vector<double>> default_v_grid(int n) {
    std::vector<std::vector<double>> out;
    out.push_back(std::vector<double>(static_cast<std::size_t>(n), 1.5));
    out.push_back(std::vector<double>(static_cast<std::size_t>(n), 2.0));
    {
        std::vector<double> mixed(static_cast<std::size_t>(n), 2.0);
        mixed[0] = 1.5;
        out.push_back(mixed);
    }
    return out;
}

namespace detail {

inline std::vector<double> hadamard(const std::vector<double>& a,
                                    const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

inline std::string vec_str(const std::vector<double>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

/// Ratio curve joint(scale*t, x)/joint(t, x); analytic or MC with hit floors.
/// Returns nullopt-style empty curve with "low hits" note via ok=false.
struct JointRatio {
    RatioCurve curve;
    bool usable = true;
};

inline JointRatio joint_ratio_curve(const VectorModel& m, const std::vector<double>& t,
                                    const std::vector<double>& scale,
                                    const std::vector<double>& x_grid, const McOpts& mc) {
    JointRatio out;
    out.curve.id = "joint " + vec_str(scale) + "*t, t=" + vec_str(t);
    out.curve.xs = x_grid;
    const std::vector<double> st = hadamard(scale, t);
    if (m.analytic_joint()) {
        for (double x : x_grid)
            out.curve.log_values.push_back(m.log_joint_tail(st, x) - m.log_joint_tail(t, x));
        finalize_curve(out.curve);
        return out;
    }
    if (mc.n_samples == 0) {
        out.usable = false;
        return out;
    }
    JointEstimate num = mc_joint(m, st, x_grid, mc.n_samples, mc.seed, mc.workers);
    JointEstimate den = mc_joint(m, t, x_grid, mc.n_samples, mc.seed, mc.workers);
    for (std::size_t j = 0; j < x_grid.size(); ++j) {
        if (den.hits[j] < mc.min_hits || num.hits[j] < mc.min_hits) {
            out.usable = j > x_grid.size() / 2;  // tolerate thin top only
            if (!out.usable) return out;
            out.curve.xs.resize(j);
            out.curve.log_values.resize(j);
            break;
        }
        out.curve.log_values.push_back(std::log(num.est[j]) - std::log(den.est[j]));
        out.curve.stderrs.push_back(num.se[j] / num.est[j] + den.se[j] / den.est[j]);
    }
    out.curve.stderrs.resize(out.curve.xs.size(), 0.0);
    finalize_curve(out.curve);
    out.usable = out.curve.xs.size() >= 5;
    return out;
}

// largest MC stderr over the top decade (0 for analytic curves)
inline double top_noise(const RatioCurve& c) {
    if (c.xs.empty()) return 0.0;
    const double cut = c.xs.back() / 10.0;
    double mx = 0.0;
    for (std::size_t i = 0; i < c.xs.size() && i < c.stderrs.size(); ++i)
        if (c.xs[i] >= cut) mx = std::max(mx, c.stderrs[i]);
    return mx;
}

/// Weak (bounded both ways) or strong (slope flat, stable positive limit)
/// equivalence of every marginal to the first one.
inline bool kernel_equivalence(const VectorModel& m, const std::vector<double>& x_grid,
                               bool strong, const Tolerances& tol,
                               std::vector<RatioCurve>& evidence, std::string& note) {
    const auto& marg = m.marginals();
    for (std::size_t i = 1; i < marg.size(); ++i) {
        RatioCurve c;
        c.id = "marginal_" + std::to_string(i + 1) + "/marginal_1";
        c.xs = x_grid;
        for (double x : x_grid)
            c.log_values.push_back(marg[i]->log_tail(x) - marg[0]->log_tail(x));
        finalize_curve(c);
        const bool bounded_two_way =
            std::isfinite(c.limit_estimate) && c.limit_estimate > 1e-290 &&
            c.limit_estimate < 1e290 && std::fabs(c.slope) <= 10 * tol.slope_flat;
        const bool stable = std::fabs(c.slope) <= tol.slope_flat && c.limit_estimate > 0.0;
        evidence.push_back(std::move(c));
        if (strong ? !stable : !bounded_two_way) {
            note = "kernel equivalence fails at marginal " + std::to_string(i + 1);
            return false;
        }
    }
    return true;
}

}  // namespace detail

/// Membership in D_n: all joint scale-down ratios bounded plus a weak kernel.
inline VectorClassReport check_Dn(const VectorModel& m,
                                  const std::vector<std::vector<double>>& t_grid,
                                  const std::vector<std::vector<double>>& b_grid,
                                  const std::vector<double>& x_grid,
                                  const Tolerances& tol = {}, const McOpts& mc = {}) {
    VectorClassReport rep;
    bool any_fail = false, any_inconclusive = false;
    for (const auto& t : t_grid) {
        for (const auto& b : b_grid) {
            for (double bi : b)
                if (!(bi > 0.0 && bi < 1.0))
                    throw std::invalid_argument("check_Dn: b must lie in (0,1)^n");
            detail::JointRatio jr = detail::joint_ratio_curve(m, t, b, x_grid, mc);
            if (!jr.usable) {
                any_inconclusive = true;
                continue;
            }
            // the ratio is >= 1 and approaches its limsup from above, so a
            // decreasing curve is bounded; only an upward slope (beyond MC
            // noise) signals divergence
            const double allow = tol.slope_flat + 2.0 * detail::top_noise(jr.curve);
            if (!std::isfinite(jr.curve.slope) || std::isnan(jr.curve.limit_estimate))
                any_inconclusive = true;
            else if (jr.curve.slope > allow || jr.curve.limit_estimate >= 1e290)
                any_fail = true;
            rep.evidence.push_back(std::move(jr.curve));
        }
    }
    // weak kernel: every marginal dominatedly varying and weakly equivalent
    for (const auto& marg : m.marginals()) {
        ClassVerdict v = check_class(*marg, ClassId::D, tol);
        if (v.verdict == Verdict::fails) any_fail = true;
        if (v.verdict == Verdict::inconclusive) any_inconclusive = true;
    }
    if (!detail::kernel_equivalence(m, x_grid, false, tol, rep.evidence, rep.note))
        any_fail = true;
    rep.verdict = any_fail ? Verdict::fails
                           : (any_inconclusive ? Verdict::inconclusive : Verdict::holds);
    return rep;
}

/// Membership in PD_n: joint ratios at v > 1 bounded below 1 plus a strong
/// kernel (marginals strongly equivalent to the first).
inline VectorClassReport check_PDn(const VectorModel& m,
                                   const std::vector<std::vector<double>>& t_grid,
                                   const std::vector<std::vector<double>>& v_grid,
                                   const std::vector<double>& x_grid,
                                   const Tolerances& tol = {}, const McOpts& mc = {}) {
    VectorClassReport rep;
    bool any_fail = false, any_inconclusive = false;
    for (const auto& t : t_grid) {
        for (const auto& v : v_grid) {
            double vmin = inf;
            for (double vi : v) {
                if (!(vi > 1.0))
                    throw std::invalid_argument("check_PDn: v must exceed 1 componentwise");
                vmin = std::min(vmin, vi);
            }
            if (vmin < 1.0 + tol.pd_margin) {
                // too close to the boundary for the margin rule to discriminate
                any_inconclusive = true;
                rep.note = "v near 1: margin rule not applicable";
                continue;
            }
            detail::JointRatio jr = detail::joint_ratio_curve(m, t, v, x_grid, mc);
            if (!jr.usable) {
                any_inconclusive = true;
                continue;
            }
            double sup = 0.0;
            const double cut = jr.curve.xs.back() / 10.0;
            for (std::size_t i = 0; i < jr.curve.xs.size(); ++i)
                if (jr.curve.xs[i] >= cut) sup = std::max(sup, jr.curve.values[i]);
            if (sup >= 1.0 - tol.pd_margin) {
                if (std::fabs(jr.curve.slope) <= tol.slope_flat)
                    any_fail = true;
                else
                    any_inconclusive = true;
            }
            rep.evidence.push_back(std::move(jr.curve));
        }
    }
    if (!detail::kernel_equivalence(m, x_grid, true, tol, rep.evidence, rep.note))
        any_fail = true;
    rep.verdict = any_fail ? Verdict::fails
                           : (any_inconclusive ? Verdict::inconclusive : Verdict::holds);
    return rep;
}

// ---------------------------------------------------------------------------
// Sandwich bounds for 2-vector sums (proof inequalities)

struct SandwichBounds {
    double lower = 0.0, upper = 0.0;
};

/// For Z = X + Y (independent, non-negative, n = 2):
///   upper: sum over the 4 source pickings of the half-scaled joint tails,
///   lower: 2^{-2} times the sum of the unscaled joint tails.
inline SandwichBounds sandwich_bounds(const VectorSum& sum, const std::vector<double>& t,
                                      double x) {
    if (sum.dim() != 2) throw std::invalid_argument("sandwich_bounds: n = 2 only");
    const VectorModel& a = *sum.first();
    const VectorModel& b = *sum.second();
    auto combo = [&](const VectorModel& m1, const VectorModel& m2, double scale) {
        // P[first component from m1 > t1 s x, second from m2 > t2 s x]
        if (&m1 == &m2) return m1.joint_tail({t[0] / scale, t[1] / scale}, x * scale);
        return m1.marginals()[0]->tail(t[0] * x) * m2.marginals()[1]->tail(t[1] * x);
    };
    auto combo_scaled = [&](const VectorModel& m1, const VectorModel& m2) {
        if (&m1 == &m2) return m1.joint_tail(t, x / 2.0);
        return m1.marginals()[0]->tail(t[0] * x / 2.0) * m2.marginals()[1]->tail(t[1] * x / 2.0);
    };
    SandwichBounds out;
    const VectorModel* parts[2] = {&a, &b};
    for (const VectorModel* m1 : parts)
        for (const VectorModel* m2 : parts) {
            out.upper += combo_scaled(*m1, *m2);
            out.lower += combo(*m1, *m2, 1.0);
        }
    out.lower /= 4.0;
    return out;
}

// ---------------------------------------------------------------------------
// MRV comparison

struct MrvReport {
    bool applicable = false;
    VectorClassReport dn;
    bool homogeneity_ok = false;
    std::string note;
};

/// MRV ⊂ D_n probe: requires spectral mass on the all-positive orthant,
/// runs check_Dn, and verifies the homogeneity bound
/// joint(b t, x)/joint(t, x) <= (min_i b_i)^{-alpha} (1 + tol).
inline MrvReport check_mrv_in_Dn(const MrvSpectral& m,
                                 const std::vector<double>& x_grid,
                                 const Tolerances& tol = {}) {
    MrvReport rep;
    if (!m.positive_orthant_mass()) {
        rep.note = "no spectral mass on the positive orthant: nu((1,inf]) = 0";
        return rep;
    }
    rep.applicable = true;
    rep.dn = check_Dn(m, default_t_grid(m.dim()), default_b_grid(m.dim()), x_grid, tol);
    rep.homogeneity_ok = true;
    for (const auto& t : default_t_grid(m.dim())) {
        for (const auto& b : default_b_grid(m.dim())) {
            double bmin = 1.0;
            for (double bi : b) bmin = std::min(bmin, bi);
            const double bound = std::pow(bmin, -m.alpha()) * (1.0 + tol.limit_one_tol);
            for (double x : x_grid) {
                const double ratio = std::exp(m.log_joint_tail(detail::hadamard(b, t), x) -
                                              m.log_joint_tail(t, x));
                if (ratio > bound) {
                    rep.homogeneity_ok = false;
                    rep.note = "homogeneity bound violated at t=" + detail::vec_str(t);
                }
            }
        }
    }
    return rep;
}

}  // namespace heavytail
