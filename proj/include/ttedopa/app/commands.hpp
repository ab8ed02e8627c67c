// commands.hpp: Subcommands behind the ttedopa executable: chain, evolve, sweep, spectrum, rates

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "ttedopa/app/config.hpp"
#include "ttedopa/app/output.hpp"
#include "ttedopa/chain_cache.hpp"
#include "ttedopa/oracles.hpp"
#include "ttedopa/ratefit.hpp"
#include "ttedopa/tdvp.hpp"
#include "ttedopa/tensor/checkpoint.hpp"

#ifndef TTEDOPA_VERSION
#define TTEDOPA_VERSION "unknown"
#endif

namespace ttedopa::app {

inline constexpr const char* kCheckpointFile = "state.ttmps";

enum ExitCode : int { kOk = 0, kFailure = 1, kInvalidInput = 2, kIoFailure = 3, kNumericalFailure = 4 };

struct Options {
    std::string config;
    std::vector<std::string> overrides;
    fs::path out{"out"};
    bool resume{false};
    unsigned jobs{0};                   // 0: hardware concurrency
    std::optional<std::string> beta;    // `chain --beta`
    std::string run;                    // `spectrum --run`: explicit run directory
};

inline RunConfig resolve(const Options& o) { return load_config(o.config, o.overrides); }

inline fs::path cache_dir(const RunConfig& c, const Options& o) {
    return c.chain_cache.empty() ? o.out / "chain-cache" : fs::path(c.chain_cache);
}

inline ChainCoefficients cached_chain(const ChainCache& cache, const ChainRequest& req) {
    auto [cc, hit] = cache.get(req);
    if (hit) spdlog::info("chain cache hit: {} (N={}, beta={})", req.hash(), cc.size(), beta_label(req.beta));
    else spdlog::info("chain cache miss: {} computed (N={}, beta={})", req.hash(), cc.size(), beta_label(req.beta));
    return cc;
}

inline void write_chain_files(const fs::path& dir, const ChainRequest& req, const ChainCoefficients& cc) {
    write_chain_csv((dir / "chain.csv").string(), cc);
    write_json(dir / "chain.json", chain_sidecar(req, cc));
}

inline nlohmann::json base_meta(const std::string& command, const RunConfig& c, const std::string& id) {
    nlohmann::json m;
    m["code_version"] = TTEDOPA_VERSION;
    m["command"] = command;
    m["run_id"] = id;
    m["config"] = to_json(c);
    return m;
}

// Settings a checkpoint must agree on to be resumed; t_final may grow.
inline nlohmann::json resume_key(const RunConfig& c, const std::string& chain_hash) {
    nlohmann::json j = to_json(c);
    j.erase("output");
    j.erase("sweep");
    j["tdvp"].erase("t_final");
    j["tdvp"].erase("checkpoint_every");
    j["tdvp"].erase("observable_stride");
    j["chain"].erase("cache_dir");
    j["chain_hash"] = chain_hash;
    return j;
}

// ------------------------------------------------------------------ chain

inline int cmd_chain(const Options& o) {
    RunConfig c = resolve(o);
    if (o.beta) c.beta = detail::parse_real("--beta", *o.beta, true);
    if (!(c.beta > 0.0)) throw InvalidInput("--beta must be > 0 or inf");
    const ChainCache cache(cache_dir(c, o));
    const ChainRequest req = c.chain_request();
    const ChainCoefficients cc = cached_chain(cache, req);

    const std::string id = c.run_id.empty() ? "chain_" + req.hash() : c.run_id;
    const fs::path dir = o.out / id;
    fs::create_directories(dir);
    write_chain_files(dir, req, cc);
    nlohmann::json meta = base_meta("chain", c, id);
    meta["chain_hash"] = cc.source_hash;
    write_json(dir / "meta.json", meta);
    spdlog::info("wrote {}", (dir / "chain.csv").string());
    return kOk;
}

// ------------------------------------------------------------------ evolve

struct RunOutcome {
    fs::path dir;
    std::string id;
    bool complete{false};
};

// One evolution into `root/<run-id>`. With `resume`, continues from the run's checkpoint.
inline RunOutcome evolve_run(RunConfig c, const fs::path& root, const ChainCache& cache, bool resume) {
    const std::string id = run_id(c);
    const fs::path dir = root / id;
    const fs::path ckpt_dir = dir / "checkpoints";
    const fs::path ckpt = ckpt_dir / kCheckpointFile;
    const fs::path obs = dir / "observables.csv";

    if (resume && !fs::exists(ckpt)) throw IoError("--resume: no checkpoint at " + ckpt.string());
    if (resume && !fs::exists(obs)) throw IoError("--resume: no observables file at " + obs.string());
    const ChainRequest req = c.chain_request();
    const ChainCoefficients cc = cached_chain(cache, req);
    const nlohmann::json key = resume_key(c, cc.source_hash);

    RunHooks hooks;
    if (resume) {
        auto cp = io::load_checkpoint(ckpt.string());
        const auto& extra = cp.header.at("extra");
        if (!extra.contains("resume_key") || extra.at("resume_key") != key)
            throw InvalidInput("--resume: checkpoint " + ckpt.string() + " was written with different settings");
        spdlog::info("{}: resuming from t = {}", id, cp.time);
        truncate_observables(obs, cp.time);
        hooks.resume_state = std::move(cp.state);
        hooks.resume_time = cp.time;
    } else {
        fs::create_directories(ckpt_dir);
        std::ofstream(obs, std::ios::trunc) << kObservablesHeader << '\n';
    }
    write_chain_files(dir, req, cc);

    std::ofstream rows(obs, std::ios::app);
    if (!rows) throw IoError("cannot append to " + obs.string());
    hooks.on_sample = [&](const Sample& s) { append_sample_rows(rows, s); };
    hooks.on_checkpoint = [&](const MpsState& psi, double t, std::size_t step) {
        rows.flush();
        nlohmann::json extra;
        extra["resume_key"] = key;
        extra["step"] = step;
        const fs::path tmp = ckpt.string() + ".tmp";
        io::save_checkpoint(tmp.string(), psi, t, extra);
        fs::rename(tmp, ckpt);
    };

    if (c.write_spectrum) c.tdvp.correlation_times.push_back(c.tdvp.t_final);
    spdlog::info("{}: evolving to t = {} (dt = {}, d = {}, D = {}, {} chain coefficients)", id, c.tdvp.t_final,
                 c.tdvp.dt, c.tdvp.fock_dim, c.tdvp.max_bond, cc.size());
    const RunResult r = run_evolution(c.model, cc, c.tdvp, hooks);
    rows.close();
    if (!rows) throw IoError("write failed: " + obs.string());
    if (c.write_spectrum) c.tdvp.correlation_times.pop_back();

    if (!r.correlation_matrices.empty()) fs::create_directories(dir / "correlations");
    for (const auto& [t, m] : r.correlation_matrices) {
        char name[64];
        std::snprintf(name, sizeof name, "C_t%010.4f.ttmat", t);
        io::save_matrix((dir / "correlations" / name).string(), m, {{"time", t}, {"first_site", 1}});
    }
    if (c.write_spectrum && !r.correlation_matrices.empty()) {
        const auto& [t, m] = r.correlation_matrices.back();
        const BathSpectrum spec = spectrum_from_correlations(m, c.bath, cc, c.spectrum_points);
        write_spectrum_csv(dir / "spectrum.csv", spec);
        write_json(dir / "spectrum.json", spectrum_sidecar(spec, t));
    }

    const ObservableTable tab = read_observables(obs);
    const auto cons = conservation(tab.at("norm"), tab.at("energy"));
    nlohmann::json meta = base_meta("evolve", c, id);
    meta["chain_hash"] = cc.source_hash;
    meta["chain"] = {{"kappa", cc.kappa}, {"N", cc.size()}};
    meta["result"] = r.metadata;
    meta["resumed"] = resume;
    meta["samples"] = tab.times.size();
    meta["t_end"] = tab.times.empty() ? 0.0 : tab.times.back();
    meta["max_norm_error"] = cons.max_norm_error;
    meta["max_energy_drift"] = cons.max_energy_drift;
    meta["complete"] = true;
    write_json(dir / "meta.json", meta);
    spdlog::info("{}: done, norm error {:.2e}, relative energy drift {:.2e}", id, cons.max_norm_error,
                 cons.max_energy_drift);
    return {dir, id, true};
}

inline int cmd_evolve(const Options& o) {
    const RunConfig c = resolve(o);
    const ChainCache cache(cache_dir(c, o));
    evolve_run(c, o.out, cache, o.resume);
    return kOk;
}

// ------------------------------------------------------------------ rates

inline nlohmann::json fit_run(const fs::path& dir, double tau, RateRow& row) {
    const auto meta = read_json(dir / "meta.json");
    const auto& cfg = meta.at("config");
    row.epsilon = cfg.at("model").at("epsilon").get<double>();
    row.beta = parse_beta(cfg.at("bath").at("beta"));
    row.tau = tau;
    row.gamma = row.rmse = std::numeric_limits<double>::quiet_NaN();
    nlohmann::json j;
    j["run_id"] = meta.at("run_id");
    j["epsilon"] = row.epsilon;
    j["beta"] = beta_json(row.beta);
    j["tau"] = tau;
    try {
        const auto tab = read_observables(dir / "observables.csv");
        const RateFit f = fit_rate(tab.times, tab.at("sigma_x"), tau);
        row.gamma = f.gamma;
        row.rmse = f.rmse;
        j["gamma"] = f.gamma;
        j["rmse"] = f.rmse;
        j["points"] = f.points;
    } catch (const InvalidInput& e) {
        spdlog::warn("{}: rate fit failed: {}", dir.filename().string(), e.what());
        j["error"] = e.what();
    }
    if (std::isfinite(row.beta)) {
        oracles::GoldenRuleParams p;
        p.epsilon = row.epsilon;
        p.alpha = cfg.at("bath").at("alpha").get<double>();
        p.beta = row.beta;
        j["golden_rule"] = {{"low_t", oracles::golden_rule_rate(p, oracles::Regime::LowT)},
                            {"high_t", oracles::golden_rule_rate(p, oracles::Regime::HighT)}};
    }
    return j;
}

inline void write_rates(const fs::path& root, const std::vector<fs::path>& runs, double tau) {
    std::vector<std::pair<RateRow, nlohmann::json>> fits;
    for (const auto& d : runs) {
        RateRow row{};
        auto j = fit_run(d, tau, row);
        fits.emplace_back(row, std::move(j));
    }
    std::stable_sort(fits.begin(), fits.end(), [](const auto& a, const auto& b) {
        return std::tie(a.first.epsilon, a.first.beta) < std::tie(b.first.epsilon, b.first.beta);
    });
    std::vector<RateRow> rows;
    nlohmann::json side;
    side["code_version"] = TTEDOPA_VERSION;
    side["columns"] = {"epsilon", "beta", "gamma", "rmse", "tau"};
    side["fit"] = "least squares of log(-<sigma_x>) against t for t > tau; gamma = -slope; rmse in log space";
    side["rows"] = nlohmann::json::array();
    for (auto& [row, j] : fits) {
        rows.push_back(row);
        side["rows"].push_back(std::move(j));
    }
    write_rates_csv(root / "rates.csv", rows);
    write_json(root / "rates.json", side);
    spdlog::info("wrote {} ({} rows)", (root / "rates.csv").string(), rows.size());
}

// Completed electron-transfer runs directly below `root`, in name order.
inline std::vector<fs::path> find_et_runs(const fs::path& root) {
    std::vector<fs::path> runs;
    if (!fs::is_directory(root)) throw IoError("output directory not found: " + root.string());
    for (const auto& e : fs::directory_iterator(root)) {
        const fs::path meta = e.path() / "meta.json";
        if (!e.is_directory() || !fs::exists(meta) || !fs::exists(e.path() / "observables.csv")) continue;
        const auto j = read_json(meta);
        if (j.value("command", "") != "evolve" || !j.value("complete", false)) continue;
        if (j.at("config").at("model").at("kind") != "et") continue;
        runs.push_back(e.path());
    }
    std::sort(runs.begin(), runs.end());
    return runs;
}

inline int cmd_rates(const Options& o) {
    const RunConfig c = resolve(o);
    const auto runs = find_et_runs(o.out);
    if (runs.empty()) throw IoError("no completed electron-transfer runs under " + o.out.string());
    write_rates(o.out, runs, c.sweep_tau);
    return kOk;
}

// ------------------------------------------------------------------ sweep

inline std::vector<RunConfig> sweep_grid(const RunConfig& base) {
    const std::vector<double> betas = base.sweep_betas.empty() ? std::vector<double>{base.beta} : base.sweep_betas;
    const std::vector<double> eps =
        base.sweep_epsilons.empty() ? std::vector<double>{base.model.epsilon} : base.sweep_epsilons;
    std::vector<RunConfig> grid;
    for (double b : betas)
        for (double e : eps) {
            RunConfig c = base;
            c.beta = b;
            c.model.epsilon = e;
            c.run_id = base.run_id.empty() ? default_run_id(c) : base.run_id + "_" + default_run_id(c);
            grid.push_back(std::move(c));
        }
    return grid;
}

// With `resume`, finished runs are kept, checkpointed runs continue and the rest start over.
inline int cmd_sweep(const Options& o) {
    const RunConfig base = resolve(o);
    const auto grid = sweep_grid(base);
    const ChainCache cache(cache_dir(base, o));
    fs::create_directories(o.out);

    // Chains first, serially, so workers only read the cache.
    for (const auto& c : grid) cached_chain(cache, c.chain_request());

    unsigned jobs = o.jobs > 0 ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(grid.size()));
    spdlog::info("sweep: {} runs on {} worker(s)", grid.size(), jobs);

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::vector<std::string> failures;
    int code = kOk;
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            const auto& c = grid[i];
            const fs::path dir = o.out / c.run_id;
            try {
                bool resume = false;
                if (o.resume && fs::exists(dir / "meta.json") && read_json(dir / "meta.json").value("complete", false)) {
                    spdlog::info("{}: already complete, skipped", c.run_id);
                    continue;
                }
                if (o.resume && fs::exists(dir / "checkpoints" / kCheckpointFile)) resume = true;
                evolve_run(c, o.out, cache, resume);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                failures.push_back(c.run_id + ": " + e.what());
                if (code == kOk) code = dynamic_cast<const InvalidInput*>(&e)        ? kInvalidInput
                                        : dynamic_cast<const IoError*>(&e)           ? kIoFailure
                                        : dynamic_cast<const NumericalFailure*>(&e) ? kNumericalFailure
                                                                                      : kFailure;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < jobs; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (const auto& f : failures) spdlog::error("run failed: {}", f);
    if (base.model.kind == ModelKind::ElectronTransfer) {
        std::vector<fs::path> dirs;
        for (const auto& c : grid)
            if (fs::exists(o.out / c.run_id / "meta.json")) dirs.push_back(o.out / c.run_id);
        if (!dirs.empty()) write_rates(o.out, dirs, base.sweep_tau);
    }
    return code;
}

// ------------------------------------------------------------------ spectrum

inline int cmd_spectrum(const Options& o) {
    const RunConfig c = resolve(o);
    const fs::path dir = o.run.empty() ? o.out / run_id(c) : fs::path(o.run);
    const fs::path ckpt = dir / "checkpoints" / kCheckpointFile;
    if (!fs::exists(ckpt)) throw IoError("spectrum: no checkpoint at " + ckpt.string());
    const ChainCoefficients cc = read_chain((dir / "chain.csv").string(), (dir / "chain.json").string());
    const auto meta = read_json(dir / "meta.json");
    const RunConfig rc = [&] {
        ptree pt;
        for (const char* section : {"model", "bath"})
            for (const auto& [key, value] : meta.at("config").at(section).items()) {
                if (value.is_string() && value.get<std::string>().empty()) continue;
                pt.put(ptree::path_type(std::string(section) + "." + key, '.'),
                       value.is_string() ? value.get<std::string>() : value.dump());
            }
        return parse_config(pt);
    }();
    const auto cp = io::load_checkpoint(ckpt.string());
    if (cp.state.size() < 2) throw InvalidInput("spectrum: checkpoint holds no chain modes");
    const cmat corr = chain_correlation_matrix(cp.state, 1, cp.state.size() - 1);
    const BathSpectrum spec = spectrum_from_correlations(corr, rc.bath, cc, c.spectrum_points);
    write_spectrum_csv(dir / "spectrum.csv", spec);
    write_json(dir / "spectrum.json", spectrum_sidecar(spec, cp.time));
    spdlog::info("wrote {} from checkpoint at t = {}", (dir / "spectrum.csv").string(), cp.time);
    return kOk;
}

} // namespace ttedopa::app
