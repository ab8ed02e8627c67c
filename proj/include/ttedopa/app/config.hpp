// config.hpp: INI run configuration: schema, overrides, validation and resolved JSON form

#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "ttedopa/chain_cache.hpp"
#include "ttedopa/errors.hpp"
#include "ttedopa/models.hpp"
#include "ttedopa/ratefit.hpp"
#include "ttedopa/spectral.hpp"
#include "ttedopa/tdvp.hpp"

namespace ttedopa::app {

using boost::property_tree::ptree;

struct RunConfig {
    ModelSpec model;
    SpectralDensity bath;
    std::string bath_table;              // CSV path for tabulated baths
    double beta{kInfiniteBeta};

    std::size_t chain_length{0};         // 0: sized from t_final and the growth buffer
    std::size_t chain_nodes{0};          // 0: default for the length
    std::string chain_cache;             // empty: <out>/chain-cache

    TdvpConfig tdvp;

    std::string run_id;                  // empty: derived from model and parameters
    bool write_spectrum{true};
    std::size_t spectrum_points{401};

    std::vector<double> sweep_betas;
    std::vector<double> sweep_epsilons;
    double sweep_tau{kDefaultTransient};

    std::size_t resolved_chain_length() const {
        if (chain_length > 0) return chain_length;
        return static_cast<std::size_t>(std::ceil(1.5 * tdvp.t_final)) + 2 * tdvp.growth_buffer;
    }
    ChainRequest chain_request() const {
        ChainRequest r;
        r.J = bath;
        r.beta = beta;
        r.n = resolved_chain_length();
        r.nodes = chain_nodes;
        return r;
    }
};

namespace detail {

// Every accepted key; anything else is rejected by name.
inline const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"model", {"kind", "omega_0", "epsilon"}},
        {"bath", {"kind", "alpha", "s", "omega_c", "table", "beta"}},
        {"chain", {"length", "nodes", "cache_dir"}},
        {"tdvp",
         {"dt", "t_final", "max_bond", "fock_dim", "growth_threshold", "growth_buffer", "observable_stride", "grow",
          "initial_modes", "krylov_dim", "krylov_tol", "checkpoint_every"}},
        {"output", {"run_id", "spectrum", "spectrum_points", "correlation_times"}},
        {"sweep", {"betas", "epsilons", "tau"}},
    };
    return s;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_real(const std::string& key, const std::string& raw, bool allow_inf = false) {
    const std::string v = trim(raw);
    if (allow_inf && (v == "inf" || v == "infinity")) return kInfiniteBeta;
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw InvalidInput("config key '" + key + "': expected a " + (allow_inf ? "number or 'inf'" : "finite number") +
                           ", got '" + v + "'");
    }
}

inline std::size_t parse_count(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size() || x < 0) throw std::invalid_argument(v);
        return static_cast<std::size_t>(x);
    } catch (const std::exception&) {
        throw InvalidInput("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InvalidInput("config key '" + key + "': expected true or false, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& raw, bool allow_inf = false) {
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_real(key, item, allow_inf));
    }
    return out;
}

inline void require(bool ok, const std::string& key, const std::string& constraint) {
    if (!ok) throw InvalidInput("config key '" + key + "' " + constraint);
}

} // namespace detail

// Reads an INI file; a missing path yields an empty tree.
inline ptree read_ini(const std::string& path) {
    ptree pt;
    if (path.empty()) return pt;
    if (!std::filesystem::exists(path)) throw IoError("config file not found: " + path);
    try {
        boost::property_tree::read_ini(path, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InvalidInput(std::string("config file: ") + e.what());
    }
    // Table paths in a file are relative to that file.
    if (auto t = pt.get_optional<std::string>("bath.table")) {
        const std::filesystem::path p(detail::trim(*t));
        if (p.is_relative()) pt.put("bath.table", (std::filesystem::path(path).parent_path() / p).string());
    }
    return pt;
}

// `section.key=value`
inline void apply_override(ptree& pt, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw InvalidInput("override '" + assignment + "' is not of the form section.key=value");
    const std::string key = detail::trim(assignment.substr(0, eq));
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
        throw InvalidInput("override key '" + key + "' must be section.key");
    pt.put(ptree::path_type(key, '.'), detail::trim(assignment.substr(eq + 1)));
}

inline void check_schema(const ptree& pt) {
    const auto& s = detail::schema();
    for (const auto& [section, body] : pt) {
        const auto it = s.find(section);
        if (it == s.end()) throw InvalidInput("unknown config section '" + section + "'");
        if (!body.data().empty()) throw InvalidInput("config key '" + section + "' must be a section, not a value");
        for (const auto& [key, value] : body)
            if (!it->second.count(key)) throw InvalidInput("unknown config key '" + section + "." + key + "'");
    }
}

inline RunConfig parse_config(const ptree& pt) {
    using namespace detail;
    check_schema(pt);
    auto get = [&](const std::string& key) { return pt.get_optional<std::string>(ptree::path_type(key, '.')); };

    RunConfig c;
    const std::string kind = get("model.kind").value_or("ibm");
    try {
        c.model.kind = parse_model_kind(trim(kind));
    } catch (const InvalidInput& e) {
        throw InvalidInput("config key 'model.kind': " + std::string(e.what()));
    }
    const bool et = c.model.kind == ModelKind::ElectronTransfer;
    c.model.alpha = et ? 0.8 : 0.1;
    if (auto v = get("model.omega_0")) c.model.omega_0 = parse_real("model.omega_0", *v);
    if (auto v = get("model.epsilon")) c.model.epsilon = parse_real("model.epsilon", *v);
    if (auto v = get("bath.alpha")) c.model.alpha = parse_real("bath.alpha", *v);
    require(c.model.alpha >= 0.0, "bath.alpha", "must be >= 0");

    const std::string bkind = trim(get("bath.kind").value_or("ohmic"));
    if (bkind == "ohmic") {
        c.bath.kind = SpectralKind::OhmicHardCutoff;
        c.bath.alpha = c.model.alpha;
        if (auto v = get("bath.s")) c.bath.s = parse_real("bath.s", *v);
        if (auto v = get("bath.omega_c")) c.bath.omega_c = parse_real("bath.omega_c", *v);
        require(c.bath.s > 0.0, "bath.s", "must be > 0");
        require(c.bath.omega_c > 0.0, "bath.omega_c", "must be > 0");
        require(!get("bath.table"), "bath.table", "is only valid with bath.kind = tabulated");
    } else if (bkind == "tabulated") {
        auto t = get("bath.table");
        require(t.has_value() && !trim(*t).empty(), "bath.table", "is required when bath.kind = tabulated");
        c.bath_table = trim(*t);
        c.bath = load_spectral_csv(c.bath_table);
    } else {
        throw InvalidInput("config key 'bath.kind': expected ohmic or tabulated, got '" + bkind + "'");
    }
    c.model.omega_c = c.bath.cutoff();
    if (auto v = get("bath.beta")) c.beta = parse_real("bath.beta", *v, true);
    require(c.beta > 0.0, "bath.beta", "must be > 0 or inf");

    if (auto v = get("chain.length")) c.chain_length = parse_count("chain.length", *v);
    if (auto v = get("chain.nodes")) c.chain_nodes = parse_count("chain.nodes", *v);
    if (auto v = get("chain.cache_dir")) c.chain_cache = trim(*v);

    auto& t = c.tdvp;
    if (auto v = get("tdvp.dt")) t.dt = parse_real("tdvp.dt", *v);
    if (auto v = get("tdvp.t_final")) t.t_final = parse_real("tdvp.t_final", *v);
    if (auto v = get("tdvp.max_bond")) t.max_bond = static_cast<Index>(parse_count("tdvp.max_bond", *v));
    if (auto v = get("tdvp.fock_dim")) t.fock_dim = static_cast<Index>(parse_count("tdvp.fock_dim", *v));
    if (auto v = get("tdvp.growth_threshold")) t.growth_threshold = parse_real("tdvp.growth_threshold", *v);
    if (auto v = get("tdvp.growth_buffer")) t.growth_buffer = parse_count("tdvp.growth_buffer", *v);
    if (auto v = get("tdvp.observable_stride")) t.observable_stride = parse_count("tdvp.observable_stride", *v);
    if (auto v = get("tdvp.grow")) t.grow = parse_bool("tdvp.grow", *v);
    if (auto v = get("tdvp.initial_modes")) t.initial_modes = parse_count("tdvp.initial_modes", *v);
    if (auto v = get("tdvp.krylov_dim")) t.krylov.max_dim = static_cast<int>(parse_count("tdvp.krylov_dim", *v));
    if (auto v = get("tdvp.krylov_tol")) t.krylov.tolerance = parse_real("tdvp.krylov_tol", *v);
    if (auto v = get("tdvp.checkpoint_every")) t.checkpoint_every = parse_count("tdvp.checkpoint_every", *v);
    else t.checkpoint_every = 200;
    require(t.dt > 0.0, "tdvp.dt", "must be > 0");
    require(t.t_final >= t.dt, "tdvp.t_final", "must be >= tdvp.dt");
    require(t.max_bond >= 1, "tdvp.max_bond", "must be >= 1");
    require(t.fock_dim >= 2, "tdvp.fock_dim", "must be >= 2");
    require(t.growth_threshold > 0.0 && t.growth_threshold < 1.0, "tdvp.growth_threshold", "must lie in (0, 1)");
    require(t.observable_stride >= 1, "tdvp.observable_stride", "must be >= 1");
    require(t.start_modes() >= 1, "tdvp.growth_buffer", "must be >= 1 when tdvp.initial_modes is 0");
    require(t.krylov.max_dim >= 2, "tdvp.krylov_dim", "must be >= 2");
    require(t.krylov.tolerance > 0.0, "tdvp.krylov_tol", "must be > 0");
    if (!t.grow)
        require(t.start_modes() <= c.resolved_chain_length(), "tdvp.initial_modes",
                "exceeds chain.length with tdvp.grow = false");

    if (auto v = get("output.run_id")) c.run_id = trim(*v);
    require(c.run_id.find('/') == std::string::npos && c.run_id != "." && c.run_id != "..", "output.run_id",
            "must be a plain directory name");
    if (auto v = get("output.spectrum")) c.write_spectrum = parse_bool("output.spectrum", *v);
    if (auto v = get("output.spectrum_points")) c.spectrum_points = parse_count("output.spectrum_points", *v);
    require(c.spectrum_points >= 3 && c.spectrum_points % 2 == 1, "output.spectrum_points", "must be odd and >= 3");
    if (auto v = get("output.correlation_times")) t.correlation_times = parse_list("output.correlation_times", *v);
    for (double x : t.correlation_times)
        require(x >= 0.0 && x <= t.t_final, "output.correlation_times", "entries must lie in [0, tdvp.t_final]");

    if (auto v = get("sweep.betas")) c.sweep_betas = parse_list("sweep.betas", *v, true);
    if (auto v = get("sweep.epsilons")) c.sweep_epsilons = parse_list("sweep.epsilons", *v);
    if (auto v = get("sweep.tau")) c.sweep_tau = parse_real("sweep.tau", *v);
    for (double b : c.sweep_betas) require(b > 0.0, "sweep.betas", "entries must be > 0 or inf");
    require(c.sweep_epsilons.empty() || et, "sweep.epsilons", "requires model.kind = et");
    require(c.sweep_tau >= 0.0, "sweep.tau", "must be >= 0");
    return c;
}

inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    ptree pt = read_ini(path);
    for (const auto& o : overrides) apply_override(pt, o);
    return parse_config(pt);
}

inline nlohmann::json beta_json(double beta) {
    if (std::isinf(beta)) return "inf";
    return beta;
}

inline std::string beta_label(double beta) {
    if (std::isinf(beta)) return "inf";
    std::ostringstream s;
    s << beta;
    return s.str();
}

// Fully resolved configuration, defaults included.
inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["model"] = {{"kind", to_string(c.model.kind)}, {"omega_0", c.model.omega_0}, {"epsilon", c.model.epsilon}};
    j["bath"] = {{"kind", c.bath.kind == SpectralKind::OhmicHardCutoff ? "ohmic" : "tabulated"},
                 {"alpha", c.model.alpha},
                 {"s", c.bath.s},
                 {"omega_c", c.bath.cutoff()},
                 {"table", c.bath_table},
                 {"beta", beta_json(c.beta)}};
    j["chain"] = {{"length", c.resolved_chain_length()},
                  {"nodes", c.chain_request().resolved_nodes()},
                  {"cache_dir", c.chain_cache}};
    const auto& t = c.tdvp;
    j["tdvp"] = {{"dt", t.dt},
                 {"t_final", t.t_final},
                 {"max_bond", t.max_bond},
                 {"fock_dim", t.fock_dim},
                 {"growth_threshold", t.growth_threshold},
                 {"growth_buffer", t.growth_buffer},
                 {"observable_stride", t.observable_stride},
                 {"grow", t.grow},
                 {"initial_modes", t.start_modes()},
                 {"krylov_dim", t.krylov.max_dim},
                 {"krylov_tol", t.krylov.tolerance},
                 {"checkpoint_every", t.checkpoint_every}};
    j["output"] = {{"run_id", c.run_id},
                   {"spectrum", c.write_spectrum},
                   {"spectrum_points", c.spectrum_points},
                   {"correlation_times", t.correlation_times}};
    nlohmann::json betas = nlohmann::json::array();
    for (double b : c.sweep_betas) betas.push_back(beta_json(b));
    j["sweep"] = {{"betas", betas}, {"epsilons", c.sweep_epsilons}, {"tau", c.sweep_tau}};
    return j;
}

// Deterministic directory name for a run.
inline std::string default_run_id(const RunConfig& c) {
    std::ostringstream s;
    s << to_string(c.model.kind) << "_beta" << beta_label(c.beta);
    if (c.model.kind == ModelKind::ElectronTransfer) s << "_eps" << c.model.epsilon;
    else s << "_a" << c.model.alpha;
    return s.str();
}

inline std::string run_id(const RunConfig& c) { return c.run_id.empty() ? default_run_id(c) : c.run_id; }

} // namespace ttedopa::app
