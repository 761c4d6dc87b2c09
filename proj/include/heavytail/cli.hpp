// Batch front-end: JSON run configs in, deterministic report.json +
// curves.csv out. Exit contract: 0 = every requested confirmation passed or
// was not applicable, 1 = config/validation error, 2 = at least one
// confirmed-false row.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "heavytail/json_io.hpp"
#include "heavytail/risk.hpp"

namespace heavytail {

struct RunResult {
    int exit_code = 0;
    json report;
    std::string csv;
};

namespace detail {

inline const json& need(const json& j, const char* key, const char* ctx) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(std::string(ctx) + ": missing key '" + key + "'");
    return j.at(key);
}

inline std::vector<double> parse_xgrid(const json& j) {
    std::vector<double> xs;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) throw ConfigError("x_grid: entries must be numbers");
            xs.push_back(v.get<double>());
        }
    } else {
        check_keys(j, {"lo", "hi", "points"}, "x_grid");
        const double lo = get_num(j, "lo", "x_grid"), hi = get_num(j, "hi", "x_grid");
        const int points = static_cast<int>(get_num(j, "points", "x_grid"));
        if (!(lo > 0.0) || !(hi > lo) || points < 2)
            throw ConfigError("x_grid: need 0 < lo < hi and points >= 2");
        xs = log_spaced(lo, hi, points);
    }
    if (xs.size() < 2) throw ConfigError("x_grid: need at least 2 points");
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (!(xs[i] > 0.0) || (i > 0 && xs[i] <= xs[i - 1]))
            throw ConfigError("x_grid: must be positive and strictly increasing");
    return xs;
}

inline double grid_entry(const json& v, const char* ctx) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && v.get<std::string>() == "inf") return inf;
    throw ConfigError(std::string(ctx) + ": entries must be numbers or \"inf\"");
}

inline std::vector<std::vector<double>> parse_tuple_grid(const json& j, int dim,
                                                         const char* ctx) {
    if (!j.is_array() || j.empty())
        throw ConfigError(std::string(ctx) + ": expected a non-empty array of arrays");
    std::vector<std::vector<double>> out;
    for (const auto& row : j) {
        if (!row.is_array() || static_cast<int>(row.size()) != dim)
            throw ConfigError(std::string(ctx) + ": each entry must have length dim");
        std::vector<double> t;
        for (const auto& v : row) t.push_back(grid_entry(v, ctx));
        out.push_back(std::move(t));
    }
    return out;
}

inline std::vector<ClassId> parse_classes(const json& cfg,
                                          const std::vector<ClassId>& fallback) {
    if (!cfg.contains("classes")) return fallback;
    const json& j = cfg["classes"];
    if (!j.is_array() || j.empty())
        throw ConfigError("classes: expected a non-empty array of class names");
    std::vector<ClassId> out;
    for (const auto& v : j) {
        if (!v.is_string()) throw ConfigError("classes: entries must be strings");
        auto id = parse_class_id(v.get<std::string>());
        if (!id) throw ConfigError("classes: unknown class '" + v.get<std::string>() + "'");
        out.push_back(*id);
    }
    return out;
}

inline ClassId parse_one_class(const json& j, const char* ctx) {
    const std::string s = get_str(j, "class", ctx);
    auto id = parse_class_id(s);
    if (!id) throw ConfigError(std::string(ctx) + ": unknown class '" + s + "'");
    return *id;
}

inline Tolerances opt_tolerances(const json& cfg) {
    return cfg.contains("tolerances") ? parse_tolerances(cfg["tolerances"]) : Tolerances{};
}

inline GridSpec opt_grid(const json& cfg) {
    return cfg.contains("grid") ? parse_grid(cfg["grid"]) : GridSpec{};
}

inline McOpts parse_mc(const json& cfg, std::uint64_t seed, int workers) {
    McOpts mc;
    mc.seed = seed;
    mc.workers = workers;
    if (cfg.contains("mc")) {
        const json& j = cfg["mc"];
        check_keys(j, {"n_samples", "min_hits"}, "mc");
        if (j.contains("n_samples"))
            mc.n_samples = static_cast<std::size_t>(get_num(j, "n_samples", "mc"));
        if (j.contains("min_hits"))
            mc.min_hits = static_cast<std::size_t>(get_num(j, "min_hits", "mc"));
    }
    return mc;
}

/// A closure report becomes confirmed-false only when its preconditions all
/// pass and the conclusion is an outright fails (never from inconclusive).
inline bool confirmed_false(const ClosureReport& r) {
    return all_pass(r.preconditions) && r.conclusion.verdict == Verdict::fails;
}

inline json closure_row(const std::string& op, const ClosureReport& rep,
                        const std::string& prefix, std::string& csv, bool& any_false) {
    json row = to_json(rep);
    row["op"] = op;
    const bool cf = confirmed_false(rep);
    row["confirmed_false"] = cf;
    any_false = any_false || cf;
    for (const auto& c : rep.conclusion.evidence) curve_to_csv(c, prefix, csv);
    return row;
}

inline json vec_row(const std::string& check, const std::string& subject,
                    const VectorClassReport& rep, const std::string& prefix,
                    std::string& csv, bool& any_false) {
    json row = to_json(rep);
    row["check"] = check;
    row["subject"] = subject;
    const bool ok = rep.verdict == Verdict::holds;
    const bool cf = rep.verdict == Verdict::fails;
    row["confirmation"] = ok ? "confirmed" : "inconclusive-vs-theory";
    row["confirmed"] = ok;
    row["confirmed_false"] = cf;
    any_false = any_false || cf;
    for (const auto& c : rep.evidence) curve_to_csv(c, prefix, csv);
    return row;
}

inline json sim_summary(const SimResult& s) {
    json targets = json::array();
    for (const auto& t : s.targets) targets.push_back(t.id);
    json flags = json::array();
    for (unsigned f : s.flags) flags.push_back(f);
    return json{{"n_samples", s.n_samples}, {"targets", targets}, {"flags", flags}};
}

inline void sim_to_csv(const SimResult& s, const std::string& prefix, std::string& csv) {
    for (const auto& t : s.targets)
        for (std::size_t i = 0; i < s.x_grid.size(); ++i)
            csv += prefix + t.id + "," + fmt(s.x_grid[i]) + "," + fmt(t.estimate[i]) + "," +
                   fmt(t.se[i]) + "\n";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline RunResult cmd_classify(const json& cfg, std::uint64_t /*seed*/, int /*workers*/) {
    detail::check_keys(cfg, {"model", "classes", "tolerances", "grid", "matuszewska"},
                       "classify");
    ModelPtr m = parse_model(detail::need(cfg, "model", "classify"));
    const Tolerances tol = detail::opt_tolerances(cfg);
    const GridSpec gs = detail::opt_grid(cfg);
    const std::vector<ClassId> classes = detail::parse_classes(
        cfg, {ClassId::K, ClassId::L, ClassId::S, ClassId::D, ClassId::C, ClassId::PD,
              ClassId::OS, ClassId::OL, ClassId::M, ClassId::Mstar, ClassId::A,
              ClassId::OA, ClassId::T, ClassId::DL, ClassId::DA});

    RunResult r;
    r.csv = "curve_id,x,value,stderr\n";
    json verdicts = json::array();
    for (ClassId cls : classes) {
        ClassVerdict v;
        try {
            v = check_class(*m, cls, tol, gs);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("classify: ") + e.what());
        }
        for (const auto& c : v.evidence)
            curve_to_csv(c, "classify/" + to_string(cls) + "/", r.csv);
        verdicts.push_back(to_json(v));
    }
    r.report = json{{"command", "classify"},
                    {"model", m->name()},
                    {"tolerances", to_json(tol)},
                    {"verdicts", verdicts}};
    bool want_mat = true;
    if (cfg.contains("matuszewska")) {
        if (!cfg["matuszewska"].is_boolean())
            throw ConfigError("classify: 'matuszewska' must be a boolean");
        want_mat = cfg["matuszewska"].get<bool>();
    }
    if (want_mat) {
        try {
            r.report["matuszewska"] = to_json(matuszewska(*m, {1.5, 2, 4, 8, 16}, 0.0, tol));
        } catch (const std::exception& e) {
            r.report["matuszewska"] = json{{"error", e.what()}};
        }
    }
    return r;
}

inline RunResult cmd_product(const json& cfg, std::uint64_t /*seed*/, int /*workers*/) {
    detail::check_keys(cfg, {"f", "y", "dependence", "classes", "tolerances", "grid"},
                       "product");
    ModelPtr f = parse_model(detail::need(cfg, "f", "product"));
    KernelPtr kernel = parse_kernel(detail::need(cfg, "dependence", "product"),
                                    parse_model(detail::need(cfg, "y", "product")));
    const Tolerances tol = detail::opt_tolerances(cfg);
    const GridSpec gs = detail::opt_grid(cfg);
    const std::vector<ClassId> classes = detail::parse_classes(
        cfg, {ClassId::Mstar, ClassId::M, ClassId::PD, ClassId::OS, ClassId::OL,
              ClassId::D, ClassId::DL, ClassId::C, ClassId::K, ClassId::DA, ClassId::T});

    RunResult r;
    r.csv = "curve_id,x,value,stderr\n";
    json rows = json::array();
    bool any_false = false;
    for (ClassId cls : classes) {
        ClosureReport rep;
        try {
            rep = verify_product_closure(f, kernel, cls, tol, gs);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("product: ") + e.what());
        } catch (const std::domain_error& e) {
            throw ConfigError(std::string("product: ") + e.what());
        }
        rows.push_back(detail::closure_row("product", rep,
                                           "product/" + to_string(cls) + "/", r.csv,
                                           any_false));
    }
    r.report = json{{"command", "product"},
                    {"subject", rows.empty() ? json(nullptr) : rows[0]["subject"]},
                    {"tolerances", to_json(tol)},
                    {"closures", rows}};
    r.exit_code = any_false ? 2 : 0;
    return r;
}

inline RunResult cmd_mixture(const json& cfg, std::uint64_t /*seed*/, int /*workers*/) {
    detail::check_keys(cfg, {"f1", "f2", "p", "classes", "tolerances", "grid"}, "mixture");
    ModelPtr f1 = parse_model(detail::need(cfg, "f1", "mixture"));
    ModelPtr f2 = parse_model(detail::need(cfg, "f2", "mixture"));
    const double p = detail::get_num(cfg, "p", "mixture");
    const Tolerances tol = detail::opt_tolerances(cfg);
    const GridSpec gs = detail::opt_grid(cfg);
    const std::vector<ClassId> classes =
        detail::parse_classes(cfg, {ClassId::PD, ClassId::T});

    RunResult r;
    r.csv = "curve_id,x,value,stderr\n";
    json rows = json::array();
    bool any_false = false;
    for (ClassId cls : classes) {
        ClosureReport rep;
        try {
            rep = verify_mixture_closure(f1, f2, p, cls, tol, gs);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("mixture: ") + e.what());
        }
        rows.push_back(detail::closure_row("mixture", rep,
                                           "mixture/" + to_string(cls) + "/", r.csv,
                                           any_false));
    }
    r.report = json{{"command", "mixture"},
                    {"subject", rows.empty() ? json(nullptr) : rows[0]["subject"]},
                    {"tolerances", to_json(tol)},
                    {"closures", rows}};
    r.exit_code = any_false ? 2 : 0;
    return r;
}

inline RunResult cmd_risk(const json& cfg, std::uint64_t seed, int workers) {
    detail::check_keys(cfg, {"model", "x_grid", "n_samples", "run", "uniformity"}, "risk");
    const json& jm = detail::need(cfg, "model", "risk");
    detail::check_keys(jm, {"n", "f", "y", "dependence"}, "risk model");
    RiskModelConfig rc;
    rc.n = static_cast<int>(detail::get_num(jm, "n", "risk model"));
    rc.f = parse_model(detail::need(jm, "f", "risk model"));
    rc.kernel = parse_kernel(detail::need(jm, "dependence", "risk model"),
                             parse_model(detail::need(jm, "y", "risk model")));
    const std::vector<double> xs = detail::parse_xgrid(detail::need(cfg, "x_grid", "risk"));
    std::size_t n_samples = 100000;
    if (cfg.contains("n_samples"))
        n_samples = static_cast<std::size_t>(detail::get_num(cfg, "n_samples", "risk"));

    std::vector<std::string> runs{"ruin"};
    if (cfg.contains("run")) {
        if (!cfg["run"].is_array()) throw ConfigError("risk: 'run' must be an array");
        runs.clear();
        for (const auto& v : cfg["run"]) {
            if (!v.is_string()) throw ConfigError("risk: 'run' entries must be strings");
            const std::string s = v.get<std::string>();
            if (s != "ruin" && s != "weighted_sums")
                throw ConfigError("risk: unknown target set '" + s + "'");
            runs.push_back(s);
        }
    }

    RunResult r;
    r.csv = "curve_id,x,value,stderr\n";
    r.report = json{{"command", "risk"},
                    {"model", rc.f->name() + " / " + rc.kernel->g()->name() + " / " +
                                  rc.kernel->kind()},
                    {"n", rc.n}};
    try {
        for (const std::string& s : runs) {
            if (s == "ruin") {
                SimResult sim = simulate_ruin(rc, xs, n_samples, seed, workers);
                r.report["ruin"] = detail::sim_summary(sim);
                detail::sim_to_csv(sim, "risk/ruin/", r.csv);
            } else {
                SimResult sim = simulate_weighted_sums(rc, xs, n_samples, seed, workers);
                r.report["weighted_sums"] = detail::sim_summary(sim);
                detail::sim_to_csv(sim, "risk/weighted/", r.csv);
            }
        }
        if (cfg.contains("uniformity")) {
            const json& ju = cfg["uniformity"];
            detail::check_keys(ju, {"n_list"}, "uniformity");
            if (!ju.contains("n_list") || !ju["n_list"].is_array())
                throw ConfigError("uniformity: 'n_list' must be an array");
            std::vector<int> n_list;
            for (const auto& v : ju["n_list"]) n_list.push_back(v.get<int>());
            UniformityReport rep =
                check_uniform_asymptotics(rc, n_list, xs, n_samples, seed, workers);
            json sup = json::array();
            for (double d : rep.sup_dev)
                sup.push_back(std::isfinite(d) ? json(d) : json(nullptr));
            r.report["uniformity"] = json{{"applicable", rep.applicable},
                                          {"moment", rep.moment},
                                          {"alpha", rep.alpha},
                                          {"beta", rep.beta},
                                          {"shrinking", rep.shrinking},
                                          {"sup_dev", sup}};
            for (std::size_t i = 0; i < rep.xs.size(); ++i)
                if (i < rep.sup_dev.size() && std::isfinite(rep.sup_dev[i]))
                    r.csv += "risk/uniformity/sup_dev," + fmt(rep.xs[i]) + "," +
                             fmt(rep.sup_dev[i]) + ",0\n";
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("risk: ") + e.what());
    }
    return r;
}

inline RunResult cmd_mvec(const json& cfg, std::uint64_t seed, int workers) {
    detail::check_keys(
        cfg, {"vector", "checks", "x_grid", "t_grid", "b_grid", "v_grid", "tolerances", "mc"},
        "mvec");
    VecPtr vec = parse_vector(detail::need(cfg, "vector", "mvec"));
    const int dim = vec->dim();
    const std::vector<double> xs = detail::parse_xgrid(detail::need(cfg, "x_grid", "mvec"));
    const Tolerances tol = detail::opt_tolerances(cfg);
    const McOpts mc = detail::parse_mc(cfg, seed, workers);
    const auto tg = cfg.contains("t_grid")
                        ? detail::parse_tuple_grid(cfg["t_grid"], dim, "t_grid")
                        : default_t_grid(dim);

    std::vector<std::string> checks{"Dn", "PDn"};
    if (cfg.contains("checks")) {
        if (!cfg["checks"].is_array() || cfg["checks"].empty())
            throw ConfigError("mvec: 'checks' must be a non-empty array");
        checks.clear();
        for (const auto& v : cfg["checks"]) {
            if (!v.is_string()) throw ConfigError("mvec: 'checks' entries must be strings");
            const std::string s = v.get<std::string>();
            if (s != "Dn" && s != "PDn" && s != "mrv")
                throw ConfigError("mvec: unknown check '" + s + "'");
            checks.push_back(s);
        }
    }

    RunResult r;
    r.csv = "curve_id,x,value,stderr\n";
    json rows = json::array();
    bool any_false = false;
    try {
        for (const std::string& s : checks) {
            if (s == "Dn") {
                const auto bg = cfg.contains("b_grid")
                                    ? detail::parse_tuple_grid(cfg["b_grid"], dim, "b_grid")
                                    : default_b_grid(dim);
                VectorClassReport rep = check_Dn(*vec, tg, bg, xs, tol, mc);
                rows.push_back(
                    detail::vec_row("Dn", vec->kind(), rep, "mvec/Dn/", r.csv, any_false));
            } else if (s == "PDn") {
                const auto vg = cfg.contains("v_grid")
                                    ? detail::parse_tuple_grid(cfg["v_grid"], dim, "v_grid")
                                    : default_v_grid(dim);
                VectorClassReport rep = check_PDn(*vec, tg, vg, xs, tol, mc);
                rows.push_back(
                    detail::vec_row("PDn", vec->kind(), rep, "mvec/PDn/", r.csv, any_false));
            } else {
                const auto* m = dynamic_cast<const MrvSpectral*>(vec.get());
                if (!m) throw ConfigError("mvec: 'mrv' check requires an mrv joint");
                MrvReport rep = check_mrv_in_Dn(*m, xs, tol);
                const bool cf =
                    rep.applicable &&
                    (rep.dn.verdict == Verdict::fails || !rep.homogeneity_ok);
                const bool ok = rep.applicable && rep.dn.verdict == Verdict::holds &&
                                rep.homogeneity_ok;
                any_false = any_false || cf;
                json row{{"check", "mrv"},
                         {"subject", vec->kind()},
                         {"applicable", rep.applicable},
                         {"homogeneity_ok", rep.homogeneity_ok},
                         {"note", rep.note},
                         {"dn", to_json(rep.dn)},
                         {"confirmation", !rep.applicable ? "not-applicable"
                                          : ok            ? "confirmed"
                                                          : "inconclusive-vs-theory"},
                         {"confirmed", ok},
                         {"confirmed_false", cf}};
                for (const auto& c : rep.dn.evidence) curve_to_csv(c, "mvec/mrv/", r.csv);
                rows.push_back(std::move(row));
            }
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("mvec: ") + e.what());
    } catch (const std::logic_error& e) {
        throw ConfigError(std::string("mvec: ") + e.what());
    }
    r.report = json{{"command", "mvec"},
                    {"subject", vec->kind()},
                    {"dim", dim},
                    {"tolerances", to_json(tol)},
                    {"checks", rows}};
    r.exit_code = any_false ? 2 : 0;
    return r;
}

// ---------------------------------------------------------------------------
// Matrix: one row per (model, transform, class) triple

/// The shipped default matrix: the closure checklist over products, mixtures,
/// and the multivariate constructions, as JSON triples.
inline json default_matrix() {
    const json pareto2{{"family", "pareto"}, {"alpha", 2}, {"xm", 1}};
    const json pareto3{{"family", "pareto"}, {"alpha", 3}, {"xm", 1}};
    const json u01{{"family", "uniform"}, {"lo", 0}, {"hi", 1}};
    const json exp1{{"family", "exponential"}, {"rate", 1}};
    const json exp2{{"family", "exponential"}, {"rate", 2}};
    const json weib{{"family", "weibull"}, {"tau", 0.5}, {"lambda", 1}};
    const json weib7{{"family", "weibull"}, {"tau", 0.7}, {"lambda", 1}};
    const json logn{{"family", "lognormal"}, {"mu", 0}, {"sigma", 1}};
    const json indep{{"kind", "independent"}};
    const json fgm05{{"kind", "fgm"}, {"theta", 0.5}};
    const json fgmm9{{"kind", "fgm"}, {"theta", -0.9}};

    json rows = json::array();
    auto product = [&](const json& f, const json& y, const json& dep, const char* cls) {
        rows.push_back(json{{"op", "product"},
                            {"f", f},
                            {"y", y},
                            {"dependence", dep},
                            {"class", cls}});
    };
    auto mix = [&](const json& f1, const json& f2, double p, const char* cls) {
        rows.push_back(
            json{{"op", "mixture"}, {"f1", f1}, {"f2", f2}, {"p", p}, {"class", cls}});
    };

    const std::vector<const char*> full{"D",  "PD", "C",  "Mstar", "M", "K",
                                        "OS", "OL", "DL", "DA",    "T"};
    for (const char* c : full) product(pareto2, u01, indep, c);
    for (const char* c : full) product(pareto2, u01, fgm05, c);
    for (const char* c : {"K", "T", "OL"}) product(weib, u01, indep, c);
    product(weib, u01, indep, "D");  // precondition fails -> not-applicable row
    for (const char* c : {"K", "T"}) product(logn, u01, indep, c);
    for (const char* c : {"D", "PD"}) product(pareto3, exp2, fgmm9, c);

    mix(pareto2, pareto3, 0.3, "PD");
    mix(pareto2, pareto3, 0.3, "T");
    mix(weib, weib7, 0.5, "T");
    mix(pareto2, exp1, 0.5, "T");  // branch 2: F2 in PD with F2_bar = o(F1_bar)
    mix(pareto2, exp1, 0.5, "PD");

    const json cf2{{"dim", 2},
                   {"joint",
                    {{"kind", "common_factor"}, {"R", pareto2}, {"weights", {1, 1}}}}};
    const json cf3{{"dim", 2},
                   {"joint",
                    {{"kind", "common_factor"}, {"R", pareto3}, {"weights", {1, 1}}}}};
    const json grid_wide{{"lo", 2}, {"hi", 20000}, {"points", 40}};
    const json grid_mc{{"lo", 5}, {"hi", 60}, {"points", 10}};
    const json t11 = json::array({json::array({1, 1})});
    const json b_mc = json::array({json::array({0.5, 0.5}), json::array({0.8, 0.8})});

    rows.push_back(json{{"op", "mvec_Dn"}, {"vector", cf2}, {"x_grid", grid_wide}});
    rows.push_back(json{{"op", "mvec_PDn"}, {"vector", cf2}, {"x_grid", grid_wide}});
    rows.push_back(json{
        {"op", "mvec_Dn"},
        {"vector",
         {{"dim", 2},
          {"joint",
           {{"kind", "scalar_product"}, {"base", cf2}, {"y", u01}, {"dependence", indep}}}}},
        {"x_grid", grid_wide}});
    rows.push_back(json{{"op", "mvec_Dn"},
                        {"vector", {{"dim", 2}, {"joint", {{"kind", "sum"}, {"a", cf2}, {"b", cf2}}}}},
                        {"x_grid", grid_mc},
                        {"t_grid", t11},
                        {"b_grid", b_mc},
                        {"n_samples", 1500000}});
    rows.push_back(json{
        {"op", "mvec_Dn"},
        {"vector",
         {{"dim", 2},
          {"joint",
           {{"kind", "stopped_sum"},
            {"base", cf2},
            {"stopping", {{"kind", "poisson"}, {"lambda", 1}, {"n_max", 9}}}}}}},
        {"x_grid", grid_mc},
        {"t_grid", t11},
        {"b_grid", b_mc},
        {"n_samples", 1500000}});
    rows.push_back(json{
        {"op", "mvec_Dn"},
        {"vector",
         {{"dim", 2}, {"joint", {{"kind", "mixture"}, {"a", cf2}, {"b", cf3}, {"p", 0.3}}}}},
        {"x_grid", grid_wide}});
    rows.push_back(json{
        {"op", "mvec_mrv"},
        {"vector",
         {{"dim", 2},
          {"joint",
           {{"kind", "mrv"},
            {"alpha", 2},
            {"r_scale", 1},
            {"directions", {{0.7071067811865476, 0.7071067811865476}}},
            {"probs", {1}}}}}},
        {"x_grid", grid_wide}});
    rows.push_back(json{{"op", "mvec_PDn"},
                        {"vector",
                         {{"dim", 2},
                          {"joint",
                           {{"kind", "mrv"},
                            {"alpha", 2},
                            {"r_scale", 1},
                            {"directions", {{1, 0.5}, {0.5, 1}}},
                            {"probs", {0.5, 0.5}}}}}},
                        {"x_grid", grid_wide}});
    return rows;
}

inline RunResult cmd_matrix(const json& cfg, std::uint64_t seed, int workers) {
    detail::check_keys(cfg, {"triples"}, "matrix");
    const json& jt = detail::need(cfg, "triples", "matrix");
    json triples;
    if (jt.is_string()) {
        if (jt.get<std::string>() != "default")
            throw ConfigError("matrix: triples must be \"default\" or an array");
        triples = default_matrix();
    } else if (jt.is_array()) {
        triples = jt;
    } else {
        throw ConfigError("matrix: triples must be \"default\" or an array");
    }

    RunResult r;
    r.csv = "curve_id,x,value,stderr\n";
    json rows = json::array();
    bool any_false = false;
    std::size_t idx = 0;
    for (const json& t : triples) {
        const std::string op = detail::get_str(t, "op", "triple");
        const std::string prefix = "matrix/" + std::to_string(idx) + "/";
        try {
            if (op == "product") {
                detail::check_keys(
                    t, {"op", "f", "y", "dependence", "class", "tolerances", "grid"},
                    "triple");
                ClosureReport rep = verify_product_closure(
                    parse_model(detail::need(t, "f", "triple")),
                    parse_kernel(detail::need(t, "dependence", "triple"),
                                 parse_model(detail::need(t, "y", "triple"))),
                    detail::parse_one_class(t, "triple"), detail::opt_tolerances(t),
                    detail::opt_grid(t));
                rows.push_back(detail::closure_row(op, rep, prefix, r.csv, any_false));
            } else if (op == "mixture") {
                detail::check_keys(t, {"op", "f1", "f2", "p", "class", "tolerances", "grid"},
                                   "triple");
                ClosureReport rep = verify_mixture_closure(
                    parse_model(detail::need(t, "f1", "triple")),
                    parse_model(detail::need(t, "f2", "triple")),
                    detail::get_num(t, "p", "triple"), detail::parse_one_class(t, "triple"),
                    detail::opt_tolerances(t), detail::opt_grid(t));
                rows.push_back(detail::closure_row(op, rep, prefix, r.csv, any_false));
            } else if (op == "mvec_Dn" || op == "mvec_PDn") {
                detail::check_keys(t,
                                   {"op", "vector", "x_grid", "t_grid", "b_grid", "v_grid",
                                    "n_samples", "tolerances"},
                                   "triple");
                VecPtr vec = parse_vector(detail::need(t, "vector", "triple"));
                const int dim = vec->dim();
                const std::vector<double> xs =
                    detail::parse_xgrid(detail::need(t, "x_grid", "triple"));
                const Tolerances tol = detail::opt_tolerances(t);
                McOpts mc;
                mc.seed = seed;
                mc.workers = workers;
                if (t.contains("n_samples"))
                    mc.n_samples =
                        static_cast<std::size_t>(detail::get_num(t, "n_samples", "triple"));
                const auto tg = t.contains("t_grid")
                                    ? detail::parse_tuple_grid(t["t_grid"], dim, "t_grid")
                                    : default_t_grid(dim);
                VectorClassReport rep;
                std::string check;
                if (op == "mvec_Dn") {
                    check = "Dn";
                    const auto bg =
                        t.contains("b_grid")
                            ? detail::parse_tuple_grid(t["b_grid"], dim, "b_grid")
                            : default_b_grid(dim);
                    rep = check_Dn(*vec, tg, bg, xs, tol, mc);
                } else {
                    check = "PDn";
                    const auto vg =
                        t.contains("v_grid")
                            ? detail::parse_tuple_grid(t["v_grid"], dim, "v_grid")
                            : default_v_grid(dim);
                    rep = check_PDn(*vec, tg, vg, xs, tol, mc);
                }
                rows.push_back(
                    detail::vec_row(check, vec->kind(), rep, prefix, r.csv, any_false));
            } else if (op == "mvec_mrv") {
                detail::check_keys(t, {"op", "vector", "x_grid", "tolerances"}, "triple");
                VecPtr vec = parse_vector(detail::need(t, "vector", "triple"));
                const auto* m = dynamic_cast<const MrvSpectral*>(vec.get());
                if (!m) throw ConfigError("mvec_mrv: joint kind must be mrv");
                const std::vector<double> xs =
                    detail::parse_xgrid(detail::need(t, "x_grid", "triple"));
                MrvReport rep = check_mrv_in_Dn(*m, xs, detail::opt_tolerances(t));
                const bool cf = rep.applicable && (rep.dn.verdict == Verdict::fails ||
                                                   !rep.homogeneity_ok);
                const bool ok = rep.applicable && rep.dn.verdict == Verdict::holds &&
                                rep.homogeneity_ok;
                any_false = any_false || cf;
                rows.push_back(json{{"op", op},
                                    {"subject", vec->kind()},
                                    {"applicable", rep.applicable},
                                    {"homogeneity_ok", rep.homogeneity_ok},
                                    {"note", rep.note},
                                    {"dn", to_json(rep.dn)},
                                    {"confirmation", !rep.applicable ? "not-applicable"
                                                     : ok            ? "confirmed"
                                                                     : "inconclusive-vs-theory"},
                                    {"confirmed", ok},
                                    {"confirmed_false", cf}});
                for (const auto& c : rep.dn.evidence) curve_to_csv(c, prefix, r.csv);
            } else {
                throw ConfigError("triple: unknown op '" + op + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError("triple " + std::to_string(idx) + ": " + e.what());
        } catch (const std::domain_error& e) {
            throw ConfigError("triple " + std::to_string(idx) + ": " + e.what());
        } catch (const std::logic_error& e) {
            throw ConfigError("triple " + std::to_string(idx) + ": " + e.what());
        }
        ++idx;
    }
    r.report = json{{"command", "matrix"}, {"rows", rows}};
    r.exit_code = any_false ? 2 : 0;
    return r;
}

// ---------------------------------------------------------------------------
// Dispatch and file plumbing

inline RunResult run_command(const std::string& command, const json& cfg,
                             std::uint64_t seed, int workers) {
    if (workers < 1) throw ConfigError("workers: must be >= 1");
    RunResult r;
    if (command == "classify")
        r = cmd_classify(cfg, seed, workers);
    else if (command == "product")
        r = cmd_product(cfg, seed, workers);
    else if (command == "mixture")
        r = cmd_mixture(cfg, seed, workers);
    else if (command == "risk")
        r = cmd_risk(cfg, seed, workers);
    else if (command == "mvec")
        r = cmd_mvec(cfg, seed, workers);
    else if (command == "matrix")
        r = cmd_matrix(cfg, seed, workers);
    else
        throw ConfigError("unknown command '" + command + "'");
    r.report["seed"] = seed;
    r.report["workers"] = workers;
    return r;
}

inline int resolve_workers(int cli_value) {
    if (cli_value > 0) return cli_value;
    if (cli_value < 0) throw ConfigError("workers: must be >= 1");
    if (const char* env = std::getenv("HEAVYTAIL_WORKERS")) {
        try {
            const int w = std::stoi(env);
            if (w >= 1) return w;
        } catch (const std::exception&) {
        }
        throw ConfigError("HEAVYTAIL_WORKERS: must be a positive integer");
    }
    return 1;
}

inline int run_files(const std::string& command, const std::string& config_path,
                     std::uint64_t seed, int workers, const std::string& out_dir) {
    json cfg;
    {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config: " + config_path);
        try {
            cfg = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config parse: ") + e.what());
        }
    }
    RunResult r = run_command(command, cfg, seed, workers);
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir + "/report.json", std::ios::binary);
        if (!out) throw ConfigError("cannot write: " + out_dir + "/report.json");
        out << r.report.dump(2) << "\n";
    }
    {
        std::ofstream out(out_dir + "/curves.csv", std::ios::binary);
        if (!out) throw ConfigError("cannot write: " + out_dir + "/curves.csv");
        out << r.csv;
    }
    return r.exit_code;
}

}  // namespace heavytail
