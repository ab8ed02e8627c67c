// output.hpp: Run-directory files: observables, spectrum, rates, metadata

#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttedopa/chainmap.hpp"
#include "ttedopa/errors.hpp"
#include "ttedopa/observables.hpp"
#include "ttedopa/tdvp.hpp"

namespace ttedopa::app {

namespace fs = std::filesystem;

inline constexpr const char* kObservablesHeader = "t,obs_name,value_re,value_im";
inline constexpr const char* kSpectrumHeader = "omega,n,n_thermal";
inline constexpr const char* kRatesHeader = "epsilon,beta,gamma,rmse,tau";

inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline double parse_num(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::stod(s);
}

// Write to a sibling temporary and rename, so readers never see a partial file.
inline void write_text_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline void write_json(const fs::path& path, const nlohmann::json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

inline nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

// Long format: one row per (time, observable).
inline void append_sample_rows(std::ostream& out, const Sample& s) {
    const std::string t = num(s.t);
    auto row = [&](const char* name, double v) { out << t << ',' << name << ',' << num(v) << ",0\n"; };
    row("sigma_x", s.sigma_x);
    row("sigma_y", s.sigma_y);
    row("sigma_z", s.sigma_z);
    row("total_occupation", s.total_occupation);
    row("energy", s.energy);
    row("norm", s.norm);
    row("chain_length", static_cast<double>(s.chain_length));
}

struct ObservableTable {
    std::vector<double> times;                       // distinct, in file order
    std::map<std::string, std::vector<double>> series;

    const std::vector<double>& at(const std::string& name) const {
        const auto it = series.find(name);
        if (it == series.end()) throw IoError("observables table has no '" + name + "' rows");
        return it->second;
    }
};

inline ObservableTable read_observables(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != kObservablesHeader) throw IoError(path.string() + " lacks header `" + std::string(kObservablesHeader) + "`");
    ObservableTable tab;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string t, name, re, im;
        if (!std::getline(row, t, ',') || !std::getline(row, name, ',') || !std::getline(row, re, ','))
            throw IoError("malformed row in " + path.string() + ": " + line);
        const double tv = parse_num(t);
        if (tab.times.empty() || tab.times.back() != tv) tab.times.push_back(tv);
        tab.series[name].push_back(parse_num(re));
    }
    for (const auto& [name, v] : tab.series)
        if (v.size() != tab.times.size()) throw IoError("observable '" + name + "' is incomplete in " + path.string());
    return tab;
}

// Keep only rows with t <= t_max, for resuming from a checkpoint.
inline void truncate_observables(const fs::path& path, double t_max) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream kept;
    std::string line;
    std::getline(in, line);
    if (line != kObservablesHeader) throw IoError(path.string() + " lacks header `" + std::string(kObservablesHeader) + "`");
    kept << line << '\n';
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        if (parse_num(line.substr(0, comma)) <= t_max + 1e-9) kept << line << '\n';
    }
    in.close();
    write_text_atomic(path, kept.str());
}

inline void write_spectrum_csv(const fs::path& path, const BathSpectrum& spec) {
    std::ostringstream out;
    out << kSpectrumHeader << '\n';
    for (std::size_t i = 0; i < spec.omegas.size(); ++i) {
        const double nt = i < spec.n_thermal.size() ? spec.n_thermal[i] : std::numeric_limits<double>::quiet_NaN();
        out << num(spec.omegas[i]) << ',' << num(spec.n_omega[i]) << ',' << num(nt) << '\n';
    }
    write_text_atomic(path, out.str());
}

inline BathSpectrum read_spectrum_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != kSpectrumHeader) throw IoError(path.string() + " lacks header `" + std::string(kSpectrumHeader) + "`");
    BathSpectrum s;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string w, n, nt;
        std::getline(row, w, ',');
        std::getline(row, n, ',');
        std::getline(row, nt);
        s.omegas.push_back(parse_num(w));
        s.n_omega.push_back(parse_num(n));
        s.n_thermal.push_back(parse_num(nt));
    }
    return s;
}

struct RateRow {
    double epsilon;
    double beta;
    double gamma;
    double rmse;
    double tau;
};

inline void write_rates_csv(const fs::path& path, const std::vector<RateRow>& rows) {
    std::ostringstream out;
    out << kRatesHeader << '\n';
    for (const auto& r : rows)
        out << num(r.epsilon) << ',' << num(r.beta) << ',' << num(r.gamma) << ',' << num(r.rmse) << ',' << num(r.tau)
            << '\n';
    write_text_atomic(path, out.str());
}

inline std::vector<RateRow> read_rates_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != kRatesHeader) throw IoError(path.string() + " lacks header `" + std::string(kRatesHeader) + "`");
    std::vector<RateRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string f[5];
        for (auto& x : f) std::getline(row, x, ',');
        rows.push_back({parse_num(f[0]), parse_num(f[1]), parse_num(f[2]), parse_num(f[3]), parse_num(f[4])});
    }
    return rows;
}

// Symmetric grid of `points` frequencies on [-ω_c, ω_c], including 0 and both endpoints.
inline std::vector<double> spectrum_grid(double omega_c, std::size_t points) {
    std::vector<double> g(points);
    const auto half = static_cast<double>(points / 2);
    for (std::size_t i = 0; i < points; ++i) g[i] = omega_c * (static_cast<double>(i) - half) / half;
    g[points / 2] = 0.0;
    return g;
}

// Recurrence coefficients recovered from chain coefficients: α_n = ω_n, β_0 = κ², β_{n+1} = t_n².
inline RecurrenceCoefficients recurrence_from_chain(const ChainCoefficients& cc) {
    RecurrenceCoefficients rc;
    rc.alpha = cc.omega;
    rc.beta.push_back(cc.kappa * cc.kappa);
    for (double t : cc.t) rc.beta.push_back(t * t);
    rc.beta.resize(rc.alpha.size());
    return rc;
}

// n(ω) on the symmetric grid from a chain correlation matrix over the first c.rows() modes.
inline BathSpectrum spectrum_from_correlations(const cmat& c, const SpectralDensity& J, const ChainCoefficients& cc,
                                               std::size_t points) {
    if (static_cast<std::size_t>(c.rows()) > cc.size())
        throw InvalidInput("spectrum: correlation matrix covers more modes than the chain provides");
    const auto Jb = thermalize(J, cc.beta);
    const auto kernel = transform_kernel(Jb, recurrence_from_chain(cc), spectrum_grid(J.cutoff(), points),
                                         static_cast<std::size_t>(c.rows()));
    return physical_occupation(bath_spectrum(c, kernel));
}

inline nlohmann::json spectrum_sidecar(const BathSpectrum& spec, double time) {
    nlohmann::json j;
    j["time"] = time;
    j["points"] = spec.omegas.size();
    j["columns"] = {"omega", "n", "n_thermal"};
    const auto pos = find_peak(spec.omegas, spec.n_omega, true, 0.0);
    if (pos) j["peak_positive"] = {{"omega", pos->omega}, {"n", pos->value}};
    const auto neg = find_peak(spec.omegas, spec.n_omega, false, pos ? 1e-6 * pos->value : 0.0);
    if (neg) j["peak_negative"] = {{"omega", neg->omega}, {"n", neg->value}};
    return j;
}

} // namespace ttedopa::app
