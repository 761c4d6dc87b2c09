// Tail diagnostics: ratio curves on geometric grids, class-membership
// verdicts with slope/boundedness rules, and Matuszewska index estimation.
#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heavytail/tabulated.hpp"
#include "heavytail/tail_model.hpp"

namespace heavytail {

// ---------------------------------------------------------------------------
// Grids and curves

struct GridSpec {
    double x0 = 0.0;   // 0 = anchor at quantile(1 - 1e-3)
    double decades = 4.0;
    int points = 40;
};

inline std::vector<double> make_grid(const TailModel& model, const GridSpec& spec) {
    if (spec.points < 30 || spec.decades < 4.0)
        throw std::invalid_argument("grid must have >= 30 points over >= 4 decades");
    double x0 = spec.x0 > 0.0 ? spec.x0 : model.quantile(1.0 - 1e-3);
    if (!(x0 > 0.0)) x0 = 1.0;
    return log_spaced(x0, x0 * std::pow(10.0, spec.decades), spec.points);
}

/// Ratio statistic evaluated on a geometric grid; values kept in log form so
/// diverging statistics (e.g. light-tail scale ratios) never overflow.
struct RatioCurve {
    std::string id;
    std::vector<double> xs;
    std::vector<double> values;      // clamped to [0, 1e300]
    std::vector<double> log_values;  // exact
    std::vector<double> stderrs;     // 0 for analytic tails
    double slope = 0.0;              // d(log value)/d(log x) over the top decade
    double limit_estimate = 0.0;     // mean of values over the top decade
};

namespace detail {

inline void finalize_curve(RatioCurve& c) {
    if (c.xs.empty()) {
        c.slope = std::numeric_limits<double>::quiet_NaN();
        c.limit_estimate = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    c.values.resize(c.log_values.size());
    for (std::size_t i = 0; i < c.log_values.size(); ++i)
        c.values[i] = std::exp(std::min(c.log_values[i], std::log(1e300)));
    if (c.stderrs.empty()) c.stderrs.assign(c.xs.size(), 0.0);

    // top decade: x >= max/10
    const double cut = c.xs.back() / 10.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, mean = 0;
    int n = 0;
    for (std::size_t i = 0; i < c.xs.size(); ++i) {
        if (c.xs[i] < cut || !std::isfinite(c.log_values[i])) continue;
        const double lx = std::log(c.xs[i]), ly = c.log_values[i];
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        mean += c.values[i];
        ++n;
    }
    if (n >= 2) {
        const double denom = n * sxx - sx * sx;
        c.slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
        c.limit_estimate = mean / n;
    } else {
        c.slope = std::numeric_limits<double>::quiet_NaN();
        c.limit_estimate = std::numeric_limits<double>::quiet_NaN();
    }
}

/// Grid points where the tail is numerically resolvable. Statistics that do
/// arithmetic on linear-scale tails (convolution, integrated-tail ratios)
/// are evaluated only here; light tails then keep a short sub-grid whose
/// divergence is still visible to the slope rules.
inline std::vector<double> resolvable(const TailModel& f, const std::vector<double>& xs,
                                      double min_log_tail = std::log(1e-12)) {
    std::vector<double> out;
    for (double x : xs)
        if (f.log_tail(x) >= min_log_tail) out.push_back(x);
    return out;
}

}  // namespace detail

struct ScaleTransform {
    double b;  // statistic F_bar(b x) / F_bar(x)
};
struct ShiftTransform {
    double a;  // statistic F_bar(x - a) / F_bar(x)
};
struct SelfConvolveTransform {};  // F_bar^{2*}(x) / F_bar(x)
struct IntegratedTransform {
    bool with_x;  // x F_bar/(E F_bar_I) if true, else F_bar/(E F_bar_I)
};

inline RatioCurve ratio_curve(const TailModel& f, const ScaleTransform& t,
                              const std::vector<double>& xs) {
    RatioCurve c;
    c.id = "scale(b=" + std::to_string(t.b) + ")";
    c.xs = xs;
    for (double x : xs) c.log_values.push_back(f.log_tail(t.b * x) - f.log_tail(x));
    detail::finalize_curve(c);
    return c;
}

inline RatioCurve ratio_curve(const TailModel& f, const ShiftTransform& t,
                              const std::vector<double>& xs) {
    RatioCurve c;
    c.id = "shift(a=" + std::to_string(t.a) + ")";
    c.xs = xs;
    for (double x : xs) c.log_values.push_back(f.log_tail(x - t.a) - f.log_tail(x));
    detail::finalize_curve(c);
    return c;
}

inline RatioCurve ratio_curve(const TailModel& f, SelfConvolveTransform,
                              const std::vector<double>& xs) {
    RatioCurve c;
    c.id = "self_convolve";
    c.xs = detail::resolvable(f, xs);
    // Convolution is taken on the positive restriction F+. Composed
    // (quadrature-backed) models are tabulated once so the double quadrature
    // stays tractable; closed-form non-negative families are used directly.
    ModelPtr view(&f, [](const TailModel*) {});  // non-owning, call-scoped
    ModelPtr conv_model = view;
    if (f.support_left() < 0.0) conv_model = std::make_shared<PositivePart>(conv_model);
    if (!f.analytic() || f.support_left() < 0.0)
        conv_model = std::make_shared<TabulatedTail>(conv_model);
    for (double x : c.xs)
        c.log_values.push_back(std::log(convolve_tail(*conv_model, *conv_model, x)) -
                               f.log_tail(x));
    detail::finalize_curve(c);
    return c;
}

inline RatioCurve ratio_curve(const TailModel& f, const IntegratedTransform& t,
                              const std::vector<double>& xs) {
    RatioCurve c;
    c.id = t.with_x ? "x*tail/(E*integrated_tail)" : "tail/(E*integrated_tail)";
    c.xs = detail::resolvable(f, xs, std::log(1e-290));
    const double m = f.mean();
    for (double x : c.xs) {
        const double fi = integrated_tail(f, x);
        const double val = f.tail(x) / (m * fi) * (t.with_x ? x : 1.0);
        c.log_values.push_back(std::log(val));
    }
    detail::finalize_curve(c);
    return c;
}

// ---------------------------------------------------------------------------
// Class verdicts

enum class ClassId { D, C, L, S, OS, OL, PD, M, Mstar, K, A, OA, T, DL, DA };
enum class Verdict { holds, fails, inconclusive };

inline std::string to_string(ClassId c) {
    switch (c) {
        case ClassId::D: return "D";
        case ClassId::C: return "C";
        case ClassId::L: return "L";
        case ClassId::S: return "S";
        case ClassId::OS: return "OS";
        case ClassId::OL: return "OL";
        case ClassId::PD: return "PD";
        case ClassId::M: return "M";
        case ClassId::Mstar: return "Mstar";
        case ClassId::K: return "K";
        case ClassId::A: return "A";
        case ClassId::OA: return "OA";
        case ClassId::T: return "T";
        case ClassId::DL: return "DL";
        case ClassId::DA: return "DA";
    }
    return "?";
}

inline std::optional<ClassId> parse_class_id(const std::string& s) {
    static const std::map<std::string, ClassId> table = {
        {"D", ClassId::D},   {"C", ClassId::C},       {"L", ClassId::L},
        {"S", ClassId::S},   {"OS", ClassId::OS},     {"OL", ClassId::OL},
        {"PD", ClassId::PD}, {"M", ClassId::M},       {"Mstar", ClassId::Mstar},
        {"K", ClassId::K},   {"A", ClassId::A},       {"OA", ClassId::OA},
        {"T", ClassId::T},   {"DL", ClassId::DL},     {"DA", ClassId::DA}};
    auto it = table.find(s);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::fails: return "fails";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct ClassVerdict {
    ClassId cls{};
    Verdict verdict = Verdict::inconclusive;
    std::vector<RatioCurve> evidence;
    std::string note;
};

/// All decision thresholds in one overridable object; the limits in the class
/// definitions are at infinity, these govern their finite-grid estimates.
struct Tolerances {
    double slope_flat = 0.02;          // |slope| below this reads as "converged/bounded"
    double pd_margin = 0.05;           // PD requires limit < 1 - margin
    double limit_one_tol = 0.02;       // L and C compare limits against 1
    double conv_two_tol = 0.1;         // S requires conv ratio within 2 +- tol
    double m_zero_tol = 0.01;          // M requires top-decade ratio below this
    double mgf_log_cap = std::log(1e300);
    std::vector<double> c_b_grid{0.99, 0.97, 0.95, 0.9};
    std::vector<double> k_eps_grid{1.0, 0.1, 0.01, 0.001};
    double index_infinite = 50.0;      // Matuszewska +inf sentinel threshold
    double decay_tol = 0.01;           // o(.) checks: top-decade value below this
    double scale_b = 0.5;              // D statistic
    double scale_v = 2.0;              // PD statistic
    double shift_a = 1.0;              // L/OL statistic
};

struct MatuszewskaEstimate {
    double beta_hat = 0.0;
    double alpha_hat = 0.0;
    std::vector<double> v_grid;
    double truncation_x = 0.0;
    bool beta_infinite = false;
    bool alpha_infinite = false;
};

namespace detail {

inline bool bounded(const RatioCurve& c, const Tolerances& tol) {
    return std::isfinite(c.limit_estimate) && c.limit_estimate < 1e290 &&
           std::fabs(c.slope) <= tol.slope_flat;
}

inline bool diverging(const RatioCurve& c, const Tolerances& tol) {
    return c.slope > tol.slope_flat || c.limit_estimate >= 1e290;
}

/// Does E[e^{eps X}] blow past the overflow cap? Scans the log-integrand of
/// ∫ e^{eps y} F_bar(y) dy; semi-decision (documented as such).
inline bool mgf_diverges(const TailModel& f, double eps, const Tolerances& tol) {
    const double lo = std::max(f.support_left(), 1e-6);
    double best = -inf;
    double prev = -inf;
    bool increasing_at_end = false;
    for (double lx = std::log(lo); lx <= std::log(1e10); lx += 0.1) {
        const double y = std::exp(lx);
        const double g = eps * y + f.log_tail(y);
        if (g > best) best = g;
        increasing_at_end = g > prev;
        prev = g;
        if (best > tol.mgf_log_cap) return true;
    }
    return increasing_at_end;
}

}  // namespace detail

ClassVerdict check_class(const TailModel& f, ClassId cls, const Tolerances& tol = {},
                         const GridSpec& grid_spec = {});

namespace detail {

inline ClassVerdict check_atomic(const TailModel& f, ClassId cls, const Tolerances& tol,
                                 const GridSpec& grid_spec) {
    ClassVerdict out;
    out.cls = cls;

    if (std::isfinite(f.support_right())) {
        // Bounded support: F_bar(vx)/F_bar(x) hits 0 for v>1, so PD holds;
        // every other class here needs an infinite right endpoint.
        out.verdict = cls == ClassId::PD ? Verdict::holds : Verdict::fails;
        out.note = "finite right endpoint";
        return out;
    }

    const std::vector<double> xs = make_grid(f, grid_spec);

    switch (cls) {
        case ClassId::D: {
            RatioCurve c = ratio_curve(f, ScaleTransform{tol.scale_b}, xs);
            if (bounded(c, tol))
                out.verdict = Verdict::holds;
            else if (diverging(c, tol))
                out.verdict = Verdict::fails;
            else
                out.verdict = Verdict::inconclusive;
            out.evidence.push_back(std::move(c));
            break;
        }
        case ClassId::PD: {
            RatioCurve c = ratio_curve(f, ScaleTransform{tol.scale_v}, xs);
            // use the top-decade max as the limsup estimate
            double sup = 0.0;
            const double cut = c.xs.back() / 10.0;
            for (std::size_t i = 0; i < c.xs.size(); ++i)
                if (c.xs[i] >= cut) sup = std::max(sup, c.values[i]);
            if (sup < 1.0 - tol.pd_margin)
                out.verdict = Verdict::holds;
            else if (std::fabs(c.slope) <= tol.slope_flat)
                out.verdict = Verdict::fails;
            else
                out.verdict = Verdict::inconclusive;
            out.evidence.push_back(std::move(c));
            break;
        }
        case ClassId::L: {
            RatioCurve c = ratio_curve(f, ShiftTransform{tol.shift_a}, xs);
            if (std::fabs(c.limit_estimate - 1.0) <= tol.limit_one_tol)
                out.verdict = Verdict::holds;
            else if (bounded(c, tol) || diverging(c, tol))
                out.verdict = Verdict::fails;
            else
                out.verdict = Verdict::inconclusive;
            out.evidence.push_back(std::move(c));
            break;
        }
        case ClassId::OL: {
            RatioCurve c = ratio_curve(f, ShiftTransform{tol.shift_a}, xs);
            if (bounded(c, tol))
                out.verdict = Verdict::holds;
            else if (diverging(c, tol))
                out.verdict = Verdict::fails;
            else
                out.verdict = Verdict::inconclusive;
            out.evidence.push_back(std::move(c));
            break;
        }
        case ClassId::C: {
            // extrapolate the scale-ratio limits to b -> 1
            std::vector<double> bs, limits;
            bool any_diverges = false;
            for (double b : tol.c_b_grid) {
                RatioCurve c = ratio_curve(f, ScaleTransform{b}, xs);
                if (diverging(c, tol)) any_diverges = true;
                bs.push_back(b);
                limits.push_back(c.limit_estimate);
                out.evidence.push_back(std::move(c));
            }
            if (any_diverges) {
                out.verdict = Verdict::fails;
                out.note = "scale ratio diverges";
                break;
            }
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            const int n = static_cast<int>(bs.size());
            for (int i = 0; i < n; ++i) {
                sx += bs[static_cast<std::size_t>(i)];
                sy += limits[static_cast<std::size_t>(i)];
                sxx += bs[static_cast<std::size_t>(i)] * bs[static_cast<std::size_t>(i)];
                sxy += bs[static_cast<std::size_t>(i)] * limits[static_cast<std::size_t>(i)];
            }
            const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            const double at_one = sy / n + slope * (1.0 - sx / n);
            out.note = "extrapolated limit " + std::to_string(at_one);
            out.verdict = std::fabs(at_one - 1.0) <= tol.limit_one_tol ? Verdict::holds
                                                                       : Verdict::fails;
            break;
        }
        case ClassId::S: {
            RatioCurve c = ratio_curve(f, SelfConvolveTransform{}, xs);
            if (std::fabs(c.limit_estimate - 2.0) <= tol.conv_two_tol * 2.0)
                out.verdict = Verdict::holds;
            else if (bounded(c, tol) || diverging(c, tol))
                out.verdict = Verdict::fails;
            else
                out.verdict = Verdict::inconclusive;
            out.evidence.push_back(std::move(c));
            break;
        }
        case ClassId::OS: {
            RatioCurve c = ratio_curve(f, SelfConvolveTransform{}, xs);
            if (bounded(c, tol))
                out.verdict = Verdict::holds;
            else if (diverging(c, tol))
                out.verdict = Verdict::fails;
            else
                out.verdict = Verdict::inconclusive;
            out.evidence.push_back(std::move(c));
            break;
        }
        case ClassId::M: {
            RatioCurve c = ratio_curve(f, IntegratedTransform{false}, xs);
            double sup = 0.0;
            const double cut = c.xs.back() / 10.0;
            for (std::size_t i = 0; i < c.xs.size(); ++i)
                if (c.xs[i] >= cut) sup = std::max(sup, c.values[i]);
            if (sup < tol.m_zero_tol && c.slope < 0.0)
                out.verdict = Verdict::holds;
            else if (std::fabs(c.slope) <= tol.slope_flat || diverging(c, tol))
                out.verdict = Verdict::fails;
            else
                out.verdict = Verdict::inconclusive;
            out.evidence.push_back(std::move(c));
            break;
        }
        case ClassId::Mstar: {
            RatioCurve c = ratio_curve(f, IntegratedTransform{true}, xs);
            if (bounded(c, tol))
                out.verdict = Verdict::holds;
            else if (diverging(c, tol))
                out.verdict = Verdict::fails;
            else
                out.verdict = Verdict::inconclusive;
            out.evidence.push_back(std::move(c));
            break;
        }
        case ClassId::K: {
            bool all_diverge = true;
            for (double eps : tol.k_eps_grid)
                all_diverge = all_diverge && mgf_diverges(f, eps, tol);
            out.verdict = all_diverge ? Verdict::holds : Verdict::fails;
            out.note = "mgf semi-decision over eps grid";
            break;
        }
        default:
            throw std::logic_error("check_atomic: composite class");
    }
    return out;
}

}  // namespace detail

/// Verdict for a single class. Composite classes (A, OA, T, DL, DA) hold iff
/// every constituent holds, fail iff any constituent fails, else inconclusive.
inline ClassVerdict check_class(const TailModel& f, ClassId cls, const Tolerances& tol,
                                const GridSpec& grid_spec) {
    auto composite = [&](std::initializer_list<ClassId> parts) {
        ClassVerdict out;
        out.cls = cls;
        std::vector<Verdict> vs;
        for (ClassId p : parts) {
            ClassVerdict sub = check_class(f, p, tol, grid_spec);
            vs.push_back(sub.verdict);
            out.note += (out.note.empty() ? "" : "; ") + to_string(p) + "=" +
                        to_string(sub.verdict);
            for (auto& e : sub.evidence) out.evidence.push_back(std::move(e));
        }
        bool any_inc = false;
        for (Verdict v : vs) {
            if (v == Verdict::fails) {
                out.verdict = Verdict::fails;
                return out;
            }
            if (v == Verdict::inconclusive) any_inc = true;
        }
        out.verdict = any_inc ? Verdict::inconclusive : Verdict::holds;
        return out;
    };

    switch (cls) {
        case ClassId::A: return composite({ClassId::S, ClassId::PD});
        case ClassId::OA: return composite({ClassId::OS, ClassId::PD});
        case ClassId::T: return composite({ClassId::L, ClassId::PD});
        case ClassId::DL: return composite({ClassId::D, ClassId::L});
        // D∩A = D∩L∩PD (D∩S = D∩L), which keeps the check convolution-free
        case ClassId::DA: return composite({ClassId::D, ClassId::L, ClassId::PD});
        default: return detail::check_atomic(f, cls, tol, grid_spec);
    }
}

/// Matuszewska index estimates from top-decade max/min scale ratios.
inline MatuszewskaEstimate matuszewska(const TailModel& f,
                                       std::vector<double> v_grid = {1.5, 2, 4, 8, 16},
                                       double truncation_x = 0.0,
                                       const Tolerances& tol = {}) {
    if (std::isfinite(f.support_right()))
        throw std::domain_error("matuszewska: requires right endpoint r_F = inf");
    if (v_grid.size() < 5) throw std::invalid_argument("matuszewska: need >= 5 scale factors");
    for (double v : v_grid)
        if (!(v > 1.0)) throw std::invalid_argument("matuszewska: v_grid must be > 1");

    MatuszewskaEstimate est;
    est.v_grid = v_grid;
    est.truncation_x = truncation_x > 0.0
                           ? truncation_x
                           : f.quantile(1.0 - 1e-3) * 1e4;

    const std::vector<double> xs = log_spaced(est.truncation_x / 10.0, est.truncation_x, 30);
    double beta = -inf, alpha = inf;
    for (double v : v_grid) {
        double log_sup = -inf, log_inf = inf;
        for (double x : xs) {
            const double r = f.log_tail(v * x) - f.log_tail(x);
            log_sup = std::max(log_sup, r);
            log_inf = std::min(log_inf, r);
        }
        const double beta_v = -log_sup / std::log(v);
        const double alpha_v = -log_inf / std::log(v);
        beta = std::max(beta, beta_v);
        alpha = std::min(alpha, alpha_v);
    }
    est.beta_infinite = beta > tol.index_infinite;
    est.alpha_infinite = alpha > tol.index_infinite;
    est.beta_hat = est.beta_infinite ? inf : beta;
    est.alpha_hat = est.alpha_infinite ? inf : alpha;
    return est;
}

}  // namespace heavytail
