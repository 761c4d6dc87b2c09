// Discrete-time risk model: randomly weighted sums S_n^Y, their running
// maxima, the discounted net-loss process S_n^theta, the finite-horizon ruin
// probability psi(x,n), and the uniformity check for the asymptotic
// equivalence psi(x,n) ~ sum_i P[X_i Theta_i > x].
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "heavytail/dependence.hpp"
#include "heavytail/product.hpp"
#include "heavytail/rng.hpp"
#include "heavytail/tail_model.hpp"

namespace heavytail {

struct RiskModelConfig {
    int n = 1;         // horizon (periods), desk scale
    ModelPtr f;        // net losses X_i (may be Shifted to attain negatives)
    KernelPtr kernel;  // within-period (X_i, Y_i) dependence; Y law = kernel->g()
};

struct TargetSeries {
    std::string id;
    std::vector<double> estimate;
    std::vector<double> se;  // zeros for quadrature targets
};

enum : unsigned { flag_below_regime = 1u, flag_zero_hits = 2u };

struct SimResult {
    std::vector<double> x_grid;
    std::vector<TargetSeries> targets;
    std::vector<unsigned> flags;  // per grid point
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    int workers = 1;

    const TargetSeries* find(const std::string& id) const {
        for (const auto& t : targets)
            if (t.id == id) return &t;
        return nullptr;
    }
};

/// Per-path algebra, exposed so tests can replay the accumulation exactly:
/// s_theta[k-1] = sum_{i<=k} x_i prod_{j<=i} y_j, smax[k-1] = running maximum,
/// terms[i-1] = x_i Theta_i.
struct PathStats {
    std::vector<double> s_theta, smax, terms;
};

inline PathStats path_stats(const std::vector<std::pair<double, double>>& pairs) {
    PathStats ps;
    double theta = 1.0, s = 0.0, smax = 0.0;
    for (const auto& [x, y] : pairs) {
        theta *= y;
        const double term = x * theta;
        ps.terms.push_back(term);
        s += term;
        smax = std::max(smax, s);
        ps.s_theta.push_back(s);
        ps.smax.push_back(smax);
    }
    return ps;
}

namespace detail {

inline void validate_risk(const RiskModelConfig& config, std::size_t n_samples,
                          int workers) {
    if (config.n < 1 || config.n > 20)
        throw std::invalid_argument("risk: horizon n must lie in [1,20]");
    if (!config.f || !config.kernel) throw std::invalid_argument("risk: missing models");
    if (config.kernel->g()->support_left() < 0.0)
        throw std::invalid_argument("risk: discount factors must be non-negative");
    if (n_samples < 10000) throw std::invalid_argument("risk: n_samples too small");
    if (workers < 1) throw std::invalid_argument("risk: workers >= 1");
}

// number of grid points strictly below v (the hit count indexes)
inline std::size_t hits_below(const std::vector<double>& grid, double v) {
    return static_cast<std::size_t>(
        std::lower_bound(grid.begin(), grid.end(), v) - grid.begin());
}

// run body(path_index, path_stream) over paths, chunked across worker threads;
// every path owns a stream derived from its global index, so results are
// byte-identical for any worker count.
template <typename Body>
void run_paths(std::uint64_t seed, std::size_t n_samples, int workers, Body&& body) {
    RngStream base(seed);
    auto chunk = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            RngStream ps = base.derive(p);
            body(p, ps);
        }
    };
    if (workers == 1) {
        chunk(0, n_samples);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t step = (n_samples + static_cast<std::size_t>(workers) - 1) /
                             static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
        const std::size_t lo = static_cast<std::size_t>(w) * step;
        const std::size_t hi = std::min(n_samples, lo + step);
        if (lo >= hi) break;
        pool.emplace_back(chunk, lo, hi);
    }
    for (auto& t : pool) t.join();
}

inline TargetSeries counts_to_series(std::string id, const std::vector<std::size_t>& cnt,
                                     std::size_t n) {
    TargetSeries t;
    t.id = std::move(id);
    for (std::size_t c : cnt) {
        const double p = static_cast<double>(c) / static_cast<double>(n);
        t.estimate.push_back(p);
        t.se.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(n)));
    }
    return t;
}

}  // namespace detail

/// Single-term tail P[X_i Theta_i > x] by nested quadrature; exact conditional
/// product tails throughout. Supported for i in {1, 2} (deeper prefixes nest
/// too many quadratures to stay within budget).
inline double term_tail_quadrature(const RiskModelConfig& config, int i, double x) {
    if (i != 1 && i != 2)
        throw std::invalid_argument("term_tail_quadrature: i must be 1 or 2");
    ModelPtr xy = product_model(config.f, config.kernel);
    if (i == 1) return xy->tail(x);
    // X_2 Theta_2 = (X_2 Y_2) * Y_1 with the prefix independent of the pair
    ModelPtr full = product_model(xy, independent_kernel(config.kernel->g()));
    return full->tail(x);
}

/// Targets: P[S_n^Y>x], P[M_n^Y>x], P[sum Y_i X_i^+ > x], sum_i P[Y_i X_i > x]
/// (the last by product quadrature for variance reduction).
inline SimResult simulate_weighted_sums(const RiskModelConfig& config,
                                        const std::vector<double>& x_grid,
                                        std::size_t n_samples, std::uint64_t seed,
                                        int workers = 1) {
    detail::validate_risk(config, n_samples, workers);
    const std::size_t nx = x_grid.size();
    const int n = config.n;

    struct Counts {
        std::vector<std::size_t> sn, mn, splus;
    };
    std::vector<Counts> per_worker(static_cast<std::size_t>(workers),
                                   {std::vector<std::size_t>(nx, 0),
                                    std::vector<std::size_t>(nx, 0),
                                    std::vector<std::size_t>(nx, 0)});
    const std::size_t step =
        (n_samples + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);

    detail::run_paths(seed, n_samples, workers, [&](std::size_t p, RngStream& ps) {
        double s = 0.0, smax = -inf, splus = 0.0;
        for (int i = 0; i < n; ++i) {
            auto [x, y] = config.kernel->sample_pair(*config.f, ps);
            s += x * y;
            smax = std::max(smax, s);
            splus += std::max(x, 0.0) * y;
        }
        Counts& c = per_worker[std::min(p / step, static_cast<std::size_t>(workers) - 1)];
        for (std::size_t j = 0; j < detail::hits_below(x_grid, s); ++j) ++c.sn[j];
        for (std::size_t j = 0; j < detail::hits_below(x_grid, smax); ++j) ++c.mn[j];
        for (std::size_t j = 0; j < detail::hits_below(x_grid, splus); ++j) ++c.splus[j];
    });

    std::vector<std::size_t> sn(nx, 0), mn(nx, 0), splus(nx, 0);
    for (const auto& c : per_worker)
        for (std::size_t j = 0; j < nx; ++j) {
            sn[j] += c.sn[j];
            mn[j] += c.mn[j];
            splus[j] += c.splus[j];
        }

    SimResult out;
    out.x_grid = x_grid;
    out.n_samples = n_samples;
    out.seed = seed;
    out.workers = workers;
    out.targets.push_back(detail::counts_to_series("S_n^Y", sn, n_samples));
    out.targets.push_back(detail::counts_to_series("M_n^Y", mn, n_samples));
    out.targets.push_back(detail::counts_to_series("sum_Y_Xplus", splus, n_samples));

    TargetSeries quad;
    quad.id = "sum_single_terms";
    ModelPtr xy = product_model(config.f, config.kernel);
    for (double x : x_grid) {
        quad.estimate.push_back(static_cast<double>(n) * xy->tail(x));
        quad.se.push_back(0.0);
    }
    out.targets.push_back(std::move(quad));

    out.flags.assign(nx, 0);
    const TargetSeries* snp = out.find("S_n^Y");
    for (std::size_t j = 0; j < nx; ++j) {
        if (snp->estimate[j] > 0.1) out.flags[j] |= flag_below_regime;
        if (sn[j] == 0) out.flags[j] |= flag_zero_hits;
    }
    return out;
}

/// Ruin probabilities psi(x,k) for every k <= n plus per-term MC tails
/// P[X_i Theta_i > x] on the same paths (common random numbers) and the
/// nested-quadrature terms for i <= 2.
inline SimResult simulate_ruin(const RiskModelConfig& config,
                               const std::vector<double>& x_grid, std::size_t n_samples,
                               std::uint64_t seed, int workers = 1) {
    detail::validate_risk(config, n_samples, workers);
    const std::size_t nx = x_grid.size();
    const int n = config.n;

    // per worker: first-exceed counts psi[k][j] and per-term counts term[i][j]
    struct Counts {
        std::vector<std::vector<std::size_t>> psi, term;
    };
    std::vector<Counts> per_worker(
        static_cast<std::size_t>(workers),
        {std::vector<std::vector<std::size_t>>(static_cast<std::size_t>(n),
                                               std::vector<std::size_t>(nx, 0)),
         std::vector<std::vector<std::size_t>>(static_cast<std::size_t>(n),
                                               std::vector<std::size_t>(nx, 0))});
    const std::size_t step =
        (n_samples + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);

    detail::run_paths(seed, n_samples, workers, [&](std::size_t p, RngStream& ps) {
        Counts& c = per_worker[std::min(p / step, static_cast<std::size_t>(workers) - 1)];
        double theta = 1.0, s = 0.0, smax = 0.0;  // S_0 = 0
        for (int k = 0; k < n; ++k) {
            auto [x, y] = config.kernel->sample_pair(*config.f, ps);
            theta *= y;
            const double term = x * theta;
            s += term;
            smax = std::max(smax, s);
            for (std::size_t j = 0; j < detail::hits_below(x_grid, smax); ++j)
                ++c.psi[static_cast<std::size_t>(k)][j];
            for (std::size_t j = 0; j < detail::hits_below(x_grid, term); ++j)
                ++c.term[static_cast<std::size_t>(k)][j];
        }
    });

    SimResult out;
    out.x_grid = x_grid;
    out.n_samples = n_samples;
    out.seed = seed;
    out.workers = workers;

    std::vector<double> sum_terms(nx, 0.0);
    for (int k = 0; k < n; ++k) {
        std::vector<std::size_t> psik(nx, 0), termk(nx, 0);
        for (const auto& c : per_worker)
            for (std::size_t j = 0; j < nx; ++j) {
                psik[j] += c.psi[static_cast<std::size_t>(k)][j];
                termk[j] += c.term[static_cast<std::size_t>(k)][j];
            }
        out.targets.push_back(
            detail::counts_to_series("psi(n=" + std::to_string(k + 1) + ")", psik, n_samples));
        TargetSeries t =
            detail::counts_to_series("term(i=" + std::to_string(k + 1) + ")", termk, n_samples);
        for (std::size_t j = 0; j < nx; ++j) sum_terms[j] += t.estimate[j];
        out.targets.push_back(std::move(t));
    }
    {
        TargetSeries t;
        t.id = "sum_terms_mc";
        t.estimate = sum_terms;
        t.se.assign(nx, 0.0);
        out.targets.push_back(std::move(t));
    }
    for (int i = 1; i <= std::min(n, 2); ++i) {
        TargetSeries t;
        t.id = "term_quad(i=" + std::to_string(i) + ")";
        for (double x : x_grid) t.estimate.push_back(term_tail_quadrature(config, i, x));
        t.se.assign(nx, 0.0);
        out.targets.push_back(std::move(t));
    }

    out.flags.assign(nx, 0);
    const TargetSeries* psin = out.find("psi(n=" + std::to_string(n) + ")");
    for (std::size_t j = 0; j < nx; ++j) {
        if (psin->estimate[j] > 0.1) out.flags[j] |= flag_below_regime;
        if (psin->estimate[j] == 0.0) out.flags[j] |= flag_zero_hits;
    }
    return out;
}

/// E[Y^a v Y^b] by quadrature in the quantile variable.
inline double moment_or(const TailModel& g, double a, double b, double rel_tol = 1e-12) {
    auto integrand = [&](double v) {
        const double y = g.quantile(v);
        return std::max(std::pow(y, a), std::pow(y, b));
    };
    QuadResult q = integrate_panels(integrand, detail::product_breaks(), rel_tol);
    return q.value;
}

struct UniformityReport {
    bool applicable = false;
    double moment = inf;          // E[Y^alpha v Y^beta]
    double alpha = 0.0, beta = 0.0;
    std::vector<double> xs;
    std::vector<double> sup_dev;  // sup over n_list of |psi/sum - 1|; NaN if unusable
    bool shrinking = false;       // coarse decade-mean comparison over the top two decades
    SimResult sim;
};

/// §4 uniformity: sup_n |psi(x,n)/sum_i P[X_i Theta_i>x] - 1| must shrink in x,
/// gated on the moment condition E[Y^alpha v Y^beta] < 1 with the Matuszewska
/// index estimates of F standing in for (alpha, beta).
inline UniformityReport check_uniform_asymptotics(const RiskModelConfig& config_base,
                                                  const std::vector<int>& n_list,
                                                  const std::vector<double>& x_grid,
                                                  std::size_t n_samples, std::uint64_t seed,
                                                  int workers = 1) {
    if (n_list.empty()) throw std::invalid_argument("uniformity: empty n_list");
    for (int n : n_list)
        if (n < 1 || n > 10) throw std::invalid_argument("uniformity: n_list within 1..10");

    UniformityReport rep;
    MatuszewskaEstimate m = matuszewska(*config_base.f);
    rep.beta = m.beta_hat;
    rep.alpha = m.alpha_hat;
    if (m.alpha_infinite || m.beta_infinite) {
        rep.applicable = false;
        return rep;
    }
    rep.moment = moment_or(*config_base.kernel->g(), rep.alpha, rep.beta);
    rep.applicable = rep.moment < 1.0;
    if (!rep.applicable) return rep;

    RiskModelConfig config = config_base;
    config.n = *std::max_element(n_list.begin(), n_list.end());
    rep.sim = simulate_ruin(config, x_grid, n_samples, seed, workers);
    rep.xs = x_grid;

    // cumulative per-term sums per n
    const std::size_t nx = x_grid.size();
    std::vector<double> cum(nx, 0.0);
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(config.n));
    for (int k = 1; k <= config.n; ++k) {
        const TargetSeries* t = rep.sim.find("term(i=" + std::to_string(k) + ")");
        for (std::size_t j = 0; j < nx; ++j) cum[j] += t->estimate[j];
        sums[static_cast<std::size_t>(k - 1)] = cum;
    }
    rep.sup_dev.assign(nx, 0.0);
    for (std::size_t j = 0; j < nx; ++j) {
        double sup = 0.0;
        bool usable = true;
        for (int n : n_list) {
            const TargetSeries* psi = rep.sim.find("psi(n=" + std::to_string(n) + ")");
            const double denom = sums[static_cast<std::size_t>(n - 1)][j];
            if (denom <= 0.0 || psi->estimate[j] <= 0.0) {
                usable = false;
                break;
            }
            sup = std::max(sup, std::fabs(psi->estimate[j] / denom - 1.0));
        }
        rep.sup_dev[j] = usable ? sup : std::numeric_limits<double>::quiet_NaN();
    }

    // decade-mean comparison: mean sup_dev over (top/100, top/10] vs (top/10, top]
    const double top = x_grid.back();
    double lo_sum = 0, hi_sum = 0;
    int lo_n = 0, hi_n = 0;
    for (std::size_t j = 0; j < nx; ++j) {
        if (!std::isfinite(rep.sup_dev[j])) continue;
        if (x_grid[j] > top / 10.0) {
            hi_sum += rep.sup_dev[j];
            ++hi_n;
        } else if (x_grid[j] > top / 100.0) {
            lo_sum += rep.sup_dev[j];
            ++lo_n;
        }
    }
    rep.shrinking = lo_n > 0 && hi_n > 0 && hi_sum / hi_n <= lo_sum / lo_n;
    return rep;
}

}  // namespace heavytail
