// JSON config parsing (strict: unknown keys rejected) and report
// serialization. The model/kernel/vector schemas here are the CLI's config
// language.
#pragma once

#include <charconv>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "heavytail/dependence.hpp"
#include "heavytail/diagnostics.hpp"
#include "heavytail/multivar.hpp"
#include "heavytail/product.hpp"
#include "heavytail/tail_model.hpp"

namespace heavytail {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal representation (CSV contract).
inline std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("fmt: to_chars failed");
    return std::string(buf, p);
}

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& ctx) {
    if (!j.is_object()) throw ConfigError(ctx + ": expected a JSON object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError(ctx + ": unknown key '" + k + "'");
}

inline double get_num(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key)) throw ConfigError(ctx + ": missing key '" + key + "'");
    if (!j[key].is_number()) throw ConfigError(ctx + ": '" + key + "' must be a number");
    return j[key].get<double>();
}

inline std::string get_str(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key)) throw ConfigError(ctx + ": missing key '" + key + "'");
    if (!j[key].is_string()) throw ConfigError(ctx + ": '" + key + "' must be a string");
    return j[key].get<std::string>();
}

}  // namespace detail

KernelPtr parse_kernel(const json& j, ModelPtr y);

/// {"family":"pareto","alpha":2,"xm":1}; mixtures and decorations nest.
inline ModelPtr parse_model(const json& j) {
    const std::string fam = detail::get_str(j, "family", "model");
    try {
        if (fam == "pareto") {
            detail::check_keys(j, {"family", "alpha", "xm"}, fam);
            return pareto(detail::get_num(j, "alpha", fam), detail::get_num(j, "xm", fam));
        }
        if (fam == "exponential") {
            detail::check_keys(j, {"family", "rate"}, fam);
            return exponential(detail::get_num(j, "rate", fam));
        }
        if (fam == "weibull") {
            detail::check_keys(j, {"family", "tau", "lambda"}, fam);
            return weibull(detail::get_num(j, "tau", fam), detail::get_num(j, "lambda", fam));
        }
        if (fam == "lognormal") {
            detail::check_keys(j, {"family", "mu", "sigma"}, fam);
            return lognormal(detail::get_num(j, "mu", fam), detail::get_num(j, "sigma", fam));
        }
        if (fam == "uniform") {
            detail::check_keys(j, {"family", "lo", "hi"}, fam);
            return uniform_pos(detail::get_num(j, "lo", fam), detail::get_num(j, "hi", fam));
        }
        if (fam == "point_mass") {
            detail::check_keys(j, {"family", "c"}, fam);
            return point_mass(detail::get_num(j, "c", fam));
        }
        if (fam == "mixture") {
            detail::check_keys(j, {"family", "p", "left", "right"}, fam);
            if (!j.contains("left") || !j.contains("right"))
                throw ConfigError("mixture: needs 'left' and 'right'");
            return mixture(detail::get_num(j, "p", fam), parse_model(j["left"]),
                           parse_model(j["right"]));
        }
        if (fam == "shifted") {
            detail::check_keys(j, {"family", "base", "c"}, fam);
            if (!j.contains("base")) throw ConfigError("shifted: needs 'base'");
            return shifted(parse_model(j["base"]), detail::get_num(j, "c", fam));
        }
        if (fam == "scaled") {
            detail::check_keys(j, {"family", "base", "theta"}, fam);
            if (!j.contains("base")) throw ConfigError("scaled: needs 'base'");
            return scaled(parse_model(j["base"]), detail::get_num(j, "theta", fam));
        }
        if (fam == "product") {
            detail::check_keys(j, {"family", "f", "y", "dependence"}, fam);
            if (!j.contains("f") || !j.contains("y") || !j.contains("dependence"))
                throw ConfigError("product: needs 'f', 'y', 'dependence'");
            return product_model(parse_model(j["f"]),
                                 parse_kernel(j["dependence"], parse_model(j["y"])));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fam + ": " + e.what());
    } catch (const std::domain_error& e) {
        throw ConfigError(fam + ": " + e.what());
    }
    throw ConfigError("model: unknown family '" + fam + "'");
}

/// {"kind":"fgm","theta":0.5} or {"kind":"independent"}; y is the G-marginal.
inline KernelPtr parse_kernel(const json& j, ModelPtr y) {
    const std::string kind = detail::get_str(j, "kind", "dependence");
    if (kind == "independent") {
        detail::check_keys(j, {"kind"}, "dependence");
        return independent_kernel(std::move(y));
    }
    if (kind == "fgm") {
        detail::check_keys(j, {"kind", "theta"}, "dependence");
        try {
            return fgm_kernel(detail::get_num(j, "theta", "fgm"), std::move(y));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("fgm: ") + e.what());
        }
    }
    throw ConfigError("dependence: unknown kind '" + kind + "'");
}

/// {"kind":"poisson","lambda":1,"n_max":9} | {"kind":"uniform","support":[1,2]}
/// | {"kind":"fixed","n":1}
inline StoppingTime parse_stopping(const json& j) {
    const std::string kind = detail::get_str(j, "kind", "stopping");
    if (kind == "fixed") {
        detail::check_keys(j, {"kind", "n"}, "stopping");
        return fixed_stop(static_cast<int>(detail::get_num(j, "n", "stopping")));
    }
    if (kind == "uniform") {
        detail::check_keys(j, {"kind", "support"}, "stopping");
        if (!j.contains("support") || !j["support"].is_array())
            throw ConfigError("stopping: 'support' must be an array");
        std::vector<int> support;
        for (const auto& v : j["support"]) support.push_back(v.get<int>());
        return uniform_stop(support);
    }
    if (kind == "poisson") {
        detail::check_keys(j, {"kind", "lambda", "n_max"}, "stopping");
        return poisson_stop(detail::get_num(j, "lambda", "stopping"),
                            static_cast<int>(detail::get_num(j, "n_max", "stopping")));
    }
    throw ConfigError("stopping: unknown kind '" + kind + "'");
}

/// {"dim":2,"joint":{"kind":"common_factor","R":{...},"weights":[1,1]},
///  "marginals":[...]} — marginals required for independent/fgm_pair joints,
/// derived (and validated for length if present) otherwise. Composite joints
/// (scalar_product, sum, stopped_sum, mixture) nest full vector specs.
inline VecPtr parse_vector(const json& j) {
    detail::check_keys(j, {"dim", "joint", "marginals"}, "vector");
    const int dim = static_cast<int>(detail::get_num(j, "dim", "vector"));
    if (!j.contains("joint")) throw ConfigError("vector: missing 'joint'");
    const json& joint = j["joint"];
    const std::string kind = detail::get_str(joint, "kind", "joint");

    std::vector<ModelPtr> marginals;
    if (j.contains("marginals")) {
        if (!j["marginals"].is_array()) throw ConfigError("vector: 'marginals' must be an array");
        for (const auto& m : j["marginals"]) marginals.push_back(parse_model(m));
        if (static_cast<int>(marginals.size()) != dim)
            throw ConfigError("vector: marginals count must equal dim");
    }
    try {
        if (kind == "independent") {
            detail::check_keys(joint, {"kind"}, "joint");
            if (marginals.empty()) throw ConfigError("independent joint: needs marginals");
            return independent_components(std::move(marginals));
        }
        if (kind == "common_factor") {
            detail::check_keys(joint, {"kind", "R", "weights"}, "joint");
            if (!joint.contains("R") || !joint.contains("weights"))
                throw ConfigError("common_factor: needs 'R' and 'weights'");
            std::vector<double> w;
            for (const auto& v : joint["weights"]) w.push_back(v.get<double>());
            if (static_cast<int>(w.size()) != dim)
                throw ConfigError("common_factor: weights count must equal dim");
            return common_factor(parse_model(joint["R"]), std::move(w));
        }
        if (kind == "fgm_pair") {
            detail::check_keys(joint, {"kind", "theta"}, "joint");
            if (dim != 2 || marginals.size() != 2)
                throw ConfigError("fgm_pair: dim 2 with two marginals required");
            return fgm_pair(detail::get_num(joint, "theta", "fgm_pair"), marginals[0],
                            marginals[1]);
        }
        if (kind == "mrv") {
            detail::check_keys(joint, {"kind", "alpha", "r_scale", "directions", "probs"},
                               "joint");
            std::vector<std::vector<double>> dirs;
            std::vector<double> probs;
            for (const auto& d : joint["directions"]) {
                std::vector<double> dir;
                for (const auto& v : d) dir.push_back(v.get<double>());
                if (static_cast<int>(dir.size()) != dim)
                    throw ConfigError("mrv: direction length must equal dim");
                dirs.push_back(std::move(dir));
            }
            for (const auto& v : joint["probs"]) probs.push_back(v.get<double>());
            return mrv_model(detail::get_num(joint, "alpha", "mrv"),
                             detail::get_num(joint, "r_scale", "mrv"), std::move(dirs),
                             std::move(probs));
        }
        if (kind == "scalar_product") {
            detail::check_keys(joint, {"kind", "base", "y", "dependence"}, "joint");
            if (!joint.contains("base") || !joint.contains("y") || !joint.contains("dependence"))
                throw ConfigError("scalar_product: needs 'base', 'y', 'dependence'");
            VecPtr base = parse_vector(joint["base"]);
            if (base->dim() != dim) throw ConfigError("scalar_product: base dim must equal dim");
            return scalar_product(std::move(base),
                                  parse_kernel(joint["dependence"], parse_model(joint["y"])));
        }
        if (kind == "sum") {
            detail::check_keys(joint, {"kind", "a", "b"}, "joint");
            if (!joint.contains("a") || !joint.contains("b"))
                throw ConfigError("sum: needs 'a' and 'b'");
            VecPtr a = parse_vector(joint["a"]), b = parse_vector(joint["b"]);
            if (a->dim() != dim || b->dim() != dim)
                throw ConfigError("sum: summand dims must equal dim");
            return vector_sum(std::move(a), std::move(b));
        }
        if (kind == "stopped_sum") {
            detail::check_keys(joint, {"kind", "base", "stopping"}, "joint");
            if (!joint.contains("base") || !joint.contains("stopping"))
                throw ConfigError("stopped_sum: needs 'base' and 'stopping'");
            VecPtr base = parse_vector(joint["base"]);
            if (base->dim() != dim) throw ConfigError("stopped_sum: base dim must equal dim");
            return stopped_vector_sum(std::move(base), parse_stopping(joint["stopping"]));
        }
        if (kind == "mixture") {
            detail::check_keys(joint, {"kind", "a", "b", "p"}, "joint");
            if (!joint.contains("a") || !joint.contains("b"))
                throw ConfigError("mixture joint: needs 'a' and 'b'");
            VecPtr a = parse_vector(joint["a"]), b = parse_vector(joint["b"]);
            if (a->dim() != dim || b->dim() != dim)
                throw ConfigError("mixture joint: component dims must equal dim");
            return vector_mixture(std::move(a), std::move(b),
                                  detail::get_num(joint, "p", "mixture joint"));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(kind + ": " + e.what());
    } catch (const std::domain_error& e) {
        throw ConfigError(kind + ": " + e.what());
    }
    throw ConfigError("joint: unknown kind '" + kind + "'");
}

/// Partial tolerance overrides; unspecified fields keep their defaults.
inline Tolerances parse_tolerances(const json& j) {
    detail::check_keys(j,
                       {"slope_flat", "pd_margin", "limit_one_tol", "conv_two_tol",
                        "m_zero_tol", "index_infinite", "decay_tol", "scale_b", "scale_v",
                        "shift_a"},
                       "tolerances");
    Tolerances tol;
    auto opt = [&](const char* key, double& field) {
        if (j.contains(key)) field = detail::get_num(j, key, "tolerances");
    };
    opt("slope_flat", tol.slope_flat);
    opt("pd_margin", tol.pd_margin);
    opt("limit_one_tol", tol.limit_one_tol);
    opt("conv_two_tol", tol.conv_two_tol);
    opt("m_zero_tol", tol.m_zero_tol);
    opt("index_infinite", tol.index_infinite);
    opt("decay_tol", tol.decay_tol);
    opt("scale_b", tol.scale_b);
    opt("scale_v", tol.scale_v);
    opt("shift_a", tol.shift_a);
    return tol;
}

inline GridSpec parse_grid(const json& j) {
    detail::check_keys(j, {"x0", "decades", "points"}, "grid");
    GridSpec g;
    if (j.contains("x0")) g.x0 = detail::get_num(j, "x0", "grid");
    if (j.contains("decades")) g.decades = detail::get_num(j, "decades", "grid");
    if (j.contains("points")) g.points = static_cast<int>(detail::get_num(j, "points", "grid"));
    return g;
}

// ---------------------------------------------------------------------------
// Serialization

inline json to_json(const Tolerances& t) {
    return json{{"slope_flat", t.slope_flat},
                {"pd_margin", t.pd_margin},
                {"limit_one_tol", t.limit_one_tol},
                {"conv_two_tol", t.conv_two_tol},
                {"m_zero_tol", t.m_zero_tol},
                {"index_infinite", t.index_infinite},
                {"decay_tol", t.decay_tol},
                {"scale_b", t.scale_b},
                {"scale_v", t.scale_v},
                {"shift_a", t.shift_a}};
}

inline json curve_summary(const RatioCurve& c) {
    json out{{"id", c.id}, {"points", c.xs.size()}};
    out["slope"] = std::isfinite(c.slope) ? json(c.slope) : json(nullptr);
    out["limit_estimate"] =
        std::isfinite(c.limit_estimate) ? json(c.limit_estimate) : json(nullptr);
    return out;
}

inline json to_json(const ClassVerdict& v) {
    json evidence = json::array();
    for (const auto& c : v.evidence) evidence.push_back(curve_summary(c));
    return json{{"class", to_string(v.cls)},
                {"verdict", to_string(v.verdict)},
                {"note", v.note},
                {"evidence", evidence}};
}

inline json to_json(const PreconditionCheck& p) {
    return json{{"name", p.name}, {"pass", p.pass}, {"detail", p.detail}};
}

inline json to_json(const ClosureReport& r) {
    json pre = json::array();
    for (const auto& p : r.preconditions) pre.push_back(to_json(p));
    return json{{"class", to_string(r.cls)},
                {"subject", r.subject},
                {"preconditions", pre},
                {"conclusion", to_json(r.conclusion)},
                {"confirmation", to_string(r.confirmation)},
                {"theorem_confirmed", r.theorem_confirmed}};
}

inline json to_json(const VectorClassReport& r) {
    json evidence = json::array();
    for (const auto& c : r.evidence) evidence.push_back(curve_summary(c));
    return json{{"verdict", to_string(r.verdict)}, {"note", r.note}, {"evidence", evidence}};
}

inline json to_json(const MatuszewskaEstimate& m) {
    return json{{"beta_hat", m.beta_infinite ? json("inf") : json(m.beta_hat)},
                {"alpha_hat", m.alpha_infinite ? json("inf") : json(m.alpha_hat)},
                {"truncation_x", m.truncation_x}};
}

/// Append curve rows (curve_id,x,value,stderr) to a CSV body.
inline void curve_to_csv(const RatioCurve& c, const std::string& prefix, std::string& csv) {
    for (std::size_t i = 0; i < c.xs.size(); ++i) {
        csv += prefix + c.id + "," + fmt(c.xs[i]) + "," + fmt(c.values[i]) + "," +
               fmt(i < c.stderrs.size() ? c.stderrs[i] : 0.0) + "\n";
    }
}

}  // namespace heavytail
