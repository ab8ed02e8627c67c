// chain_cache.hpp: On-disk chain coefficients: `n,omega,t` CSV plus a JSON sidecar, keyed by source hash

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ttedopa/chainmap.hpp"
#include "ttedopa/errors.hpp"

namespace ttedopa {

struct ChainRequest {
    SpectralDensity J;
    double beta{kInfiniteBeta};
    std::size_t n{200};
    std::size_t nodes{0};    // 0 selects default_stieltjes_nodes(n)
    double tolerance{1e-10};

    std::size_t resolved_nodes() const { return nodes == 0 ? default_stieltjes_nodes(n) : nodes; }
    std::string hash() const { return chain_source_hash(J, beta, n, resolved_nodes()); }
};


// Rows n = 1..N; t_n couples n and n+1, so the last row's t is `nan`.
inline void write_chain_csv(const std::string& path, const ChainCoefficients& cc) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write chain file: " + path);
    out << "n,omega,t\n";
    for (std::size_t k = 0; k < cc.size(); ++k) {
        out << (k + 1) << ',' << detail::fmt17(cc.omega[k]) << ',';
        if (k < cc.t.size()) out << detail::fmt17(cc.t[k]);
        else out << "nan";
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

inline nlohmann::json chain_sidecar(const ChainRequest& req, const ChainCoefficients& cc) {
    nlohmann::json j;
    j["alpha"] = req.J.alpha;
    j["s"] = req.J.s;
    j["omega_c"] = req.J.cutoff();
    if (std::isinf(req.beta)) j["beta"] = "inf";
    else j["beta"] = req.beta;
    j["kappa"] = cc.kappa;
    j["N"] = cc.size();
    j["nodes"] = req.resolved_nodes();
    j["tolerance"] = req.tolerance;
    j["source_hash"] = cc.source_hash;
    return j;
}

inline double parse_beta(const nlohmann::json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return kInfiniteBeta;
        return std::stod(s);
    }
    return v.get<double>();
}

inline ChainCoefficients read_chain(const std::string& csv_path, const std::string& json_path) {
    std::ifstream js(json_path);
    if (!js) throw IoError("cannot open chain sidecar: " + json_path);
    const auto meta = nlohmann::json::parse(js);
    ChainCoefficients cc;
    cc.kappa = meta.at("kappa").get<double>();
    cc.beta = parse_beta(meta.at("beta"));
    cc.source_hash = meta.value("source_hash", "");

    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open chain file: " + csv_path);
    std::string line;
    std::getline(in, line);
    if (line.rfind("n,omega,t", 0) != 0) throw IoError("chain file lacks `n,omega,t` header: " + csv_path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string n, w, t;
        std::getline(row, n, ',');
        std::getline(row, w, ',');
        std::getline(row, t);
        cc.omega.push_back(std::stod(w));
        if (t != "nan" && !t.empty()) cc.t.push_back(std::stod(t));
    }
    if (cc.t.size() + 1 != cc.omega.size()) throw IoError("chain file has inconsistent hopping count: " + csv_path);
    return cc;
}

class ChainCache {
public:
    explicit ChainCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::filesystem::path csv_path(const std::string& hash) const { return dir_ / ("chain-" + hash + ".csv"); }
    std::filesystem::path json_path(const std::string& hash) const { return dir_ / ("chain-" + hash + ".json"); }

    std::optional<ChainCoefficients> lookup(const ChainRequest& req) const {
        const auto h = req.hash();
        if (!std::filesystem::exists(csv_path(h)) || !std::filesystem::exists(json_path(h))) return std::nullopt;
        return read_chain(csv_path(h).string(), json_path(h).string());
    }

    void store(const ChainRequest& req, const ChainCoefficients& cc) const {
        std::filesystem::create_directories(dir_);
        const auto h = req.hash();
        write_chain_csv(csv_path(h).string(), cc);
        std::ofstream js(json_path(h));
        if (!js) throw IoError("cannot write chain sidecar: " + json_path(h).string());
        js << chain_sidecar(req, cc).dump(2) << '\n';
    }

    // Returns the chain and whether it came from disk.
    std::pair<ChainCoefficients, bool> get(const ChainRequest& req) const {
        if (auto hit = lookup(req)) return {std::move(*hit), true};
        ChainCoefficients cc = compute_chain(req.J, req.beta, req.n, req.resolved_nodes());
        store(req, cc);
        return {std::move(cc), false};
    }

private:
    std::filesystem::path dir_;
};

} // namespace ttedopa
