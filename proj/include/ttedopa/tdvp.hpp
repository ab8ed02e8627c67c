// tdvp.hpp: One-site TDVP integrator with light-cone-adaptive chain growth

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ttedopa/chainmap.hpp"
#include "ttedopa/errors.hpp"
#include "ttedopa/models.hpp"
#include "ttedopa/observables.hpp"
#include "ttedopa/tensor/effective.hpp"
#include "ttedopa/tensor/krylov.hpp"
#include "ttedopa/tensor/mpo.hpp"
#include "ttedopa/tensor/mps.hpp"

namespace ttedopa {

struct TdvpConfig {
    double dt{0.05};
    double t_final{10.0};
    Index max_bond{4};
    Index fock_dim{6};
    double growth_threshold{1e-10};
    std::size_t growth_buffer{10};
    std::size_t observable_stride{4};
    bool grow{true};                  // false: fixed chain of initial_modes sites
    std::size_t initial_modes{0};     // 0 means growth_buffer
    std::vector<double> correlation_times;
    std::size_t checkpoint_every{0};  // steps; 0 disables
    KrylovOptions krylov{};

    std::size_t steps() const { return static_cast<std::size_t>(std::llround(t_final / dt)); }
    std::size_t start_modes() const { return initial_modes == 0 ? growth_buffer : initial_modes; }

    void validate() const {
        if (!(dt > 0.0)) throw InvalidInput("tdvp.dt must be > 0");
        if (!(t_final >= dt)) throw InvalidInput("tdvp.t_final must be >= tdvp.dt");
        if (max_bond < 1) throw InvalidInput("tdvp.max_bond must be >= 1");
        if (fock_dim < 2) throw InvalidInput("tdvp.fock_dim must be >= 2");
        if (!(growth_threshold > 0.0 && growth_threshold < 1.0))
            throw InvalidInput("tdvp.growth_threshold must lie in (0, 1)");
        if (observable_stride < 1) throw InvalidInput("tdvp.observable_stride must be >= 1");
        if (start_modes() < 1) throw InvalidInput("tdvp: need at least one initial chain mode");
    }
};

// Tracks δ_n = 1 - ⟨0|ρ_n|0⟩ per chain mode and the furthest mode that has left the vacuum.
struct LightConeMonitor {
    std::vector<double> deviation;
    std::size_t front_position{0};   // number of chain modes up to and including the furthest excited one

    void update(const MpsState& psi, double threshold) {
        const auto rho = all_reduced_density_matrices(psi);
        deviation.assign(rho.size() - 1, 0.0);
        std::size_t front = 0;
        for (std::size_t i = 1; i < rho.size(); ++i) {
            deviation[i - 1] = 1.0 - rho[i](0, 0).real();
            if (deviation[i - 1] > threshold) front = i;
        }
        front_position = std::max(front_position, front);
    }
};

class TdvpIntegrator {
public:
    explicit TdvpIntegrator(MpoHamiltonian h, KrylovOptions opt = {}) : h_(std::move(h)), opt_(opt) {}

    void set_hamiltonian(MpoHamiltonian h) {
        h_ = std::move(h);
        fresh_ = false;
    }
    void invalidate() { fresh_ = false; }
    const MpoHamiltonian& hamiltonian() const noexcept { return h_; }

    // Symmetric sweep: left-to-right then right-to-left, each with dt/2 forward one-site and backward
    // zero-site evolutions. Center must be at site 0 and is returned there.
    void step(MpsState& psi, double dt) {
        const std::size_t n = psi.size();
        if (n != h_.size()) throw InvalidInput("tdvp_step: MPS and MPO lengths differ");
        if (psi.ortho_center != 0) throw InvalidInput("tdvp_step: orthogonality center must be at site 0");
        if (!fresh_ || right_.size() != n) rebuild(psi);
        const double tau = 0.5 * dt;

        for (std::size_t i = 0; i < n; ++i) {
            evolve_site(psi, i, tau);
            if (i + 1 == n) break;
            auto& a = psi.sites[i];
            cmat q, r;
            detail::thin_qr(a.left_matrix(), q, r, a.dl());
            a = SiteTensor::from_left_matrix(q, a.d());
            left_[i + 1] = extend_left(left_[i], a, h_.sites[i]);
            r = evolve_bond(left_[i + 1], right_[i], r, -tau);
            for (auto& s : psi.sites[i + 1].slices) s = r * s;
        }
        for (std::size_t i = n; i-- > 0;) {
            evolve_site(psi, i, tau);
            if (i == 0) break;
            auto& a = psi.sites[i];
            cmat q, r;
            detail::thin_qr(a.right_matrix().adjoint(), q, r, a.dr());
            a = SiteTensor::from_right_matrix(q.adjoint(), a.d());
            right_[i - 1] = extend_right(right_[i], a, h_.sites[i]);
            cmat l = evolve_bond(left_[i], right_[i - 1], cmat(r.adjoint()), -tau);
            for (auto& s : psi.sites[i - 1].slices) s = s * l;
        }
        psi.ortho_center = 0;
        fresh_ = true;
    }

private:
    void rebuild(const MpsState& psi) {
        const std::size_t n = psi.size();
        left_.assign(n, Environment());
        right_.assign(n, Environment());
        left_[0] = boundary_environment();
        right_[n - 1] = boundary_environment();
        for (std::size_t i = n - 1; i > 0; --i) right_[i - 1] = extend_right(right_[i], psi.sites[i], h_.sites[i]);
    }

    void evolve_site(MpsState& psi, std::size_t i, double tau) {
        const auto& shape = psi.sites[i];
        const auto& l = left_[i];
        const auto& r = right_[i];
        const auto& w = h_.sites[i];
        auto apply = [&](const cvec& v) { return as_vector(apply_one_site(l, w, r, as_tensor(v, shape))); };
        psi.sites[i] = as_tensor(krylov_apply_exp(apply, as_vector(shape), tau, opt_), shape);
    }

    cmat evolve_bond(const Environment& l, const Environment& r, const cmat& c, double tau) {
        const Index rows = c.rows(), cols = c.cols();
        auto apply = [&](const cvec& v) {
            const cmat m = Eigen::Map<const cmat>(v.data(), rows, cols);
            const cmat out = apply_zero_site(l, r, m);
            return cvec(Eigen::Map<const cvec>(out.data(), out.size()));
        };
        const cvec flat = Eigen::Map<const cvec>(c.data(), c.size());
        const cvec res = krylov_apply_exp(apply, flat, tau, opt_);
        return Eigen::Map<const cmat>(res.data(), rows, cols);
    }

    MpoHamiltonian h_;
    KrylovOptions opt_;
    std::vector<Environment> left_, right_;
    bool fresh_{false};
};

inline MpsState tdvp_step(MpsState psi, const MpoHamiltonian& h, double dt, const KrylovOptions& opt = {}) {
    TdvpIntegrator integ(h, opt);
    integ.step(psi, dt);
    return psi;
}

// |ψ_S(0)⟩ ⊗ |0⟩_E with bonds padded up to max_bond.
inline MpsState initial_state(const ModelSpec& model, std::size_t n_modes, Index d, Index max_bond) {
    std::vector<cvec> local;
    local.push_back(initial_system_state(model));
    for (std::size_t k = 0; k < n_modes; ++k) local.push_back(basis_vector(d, 0));
    return product_state(local, max_bond);
}

struct Sample {
    double t;
    std::size_t step;
    double sigma_x, sigma_y, sigma_z;
    std::vector<double> occupation;
    double total_occupation;
    double energy;
    double norm;
    std::size_t chain_length;
    const cmat* correlation;   // non-null when a correlation matrix was taken at this sample
};

inline Sample measure(const MpsState& psi, const MpoHamiltonian& h, double t, std::size_t step) {
    const auto rho = all_reduced_density_matrices(psi);
    Sample s{};
    s.t = t;
    s.step = step;
    s.sigma_x = (pauli::x() * rho[0]).trace().real();
    s.sigma_y = (pauli::y() * rho[0]).trace().real();
    s.sigma_z = (pauli::z() * rho[0]).trace().real();
    s.total_occupation = 0.0;
    for (std::size_t i = 1; i < rho.size(); ++i) {
        const double n = (ladder::number(rho[i].rows()) * rho[i]).trace().real();
        s.occupation.push_back(n);
        s.total_occupation += n;
    }
    s.energy = expectation(psi, h);
    s.norm = std::sqrt(std::abs(overlap(psi, psi)));
    s.chain_length = psi.size() - 1;
    s.correlation = nullptr;
    return s;
}

struct RunHooks {
    std::function<void(const Sample&)> on_sample;
    std::function<void(const MpsState&, double t, std::size_t step)> on_checkpoint;
    std::optional<MpsState> resume_state;   // continue from a checkpointed state
    double resume_time{0.0};
};

// Product initial state, symmetric 1TDVP steps, light-cone growth and periodic measurements.
inline RunResult run_evolution(const ModelSpec& model, const ChainCoefficients& chain, const TdvpConfig& cfg,
                               const RunHooks& hooks = {}) {
    cfg.validate();
    const std::size_t start = std::min(cfg.start_modes(), chain.size());
    if (start < 1) throw InvalidInput("run_evolution: chain has no coefficients");
    if (!cfg.grow && cfg.start_modes() > chain.size())
        throw InvalidInput("run_evolution: fixed chain of " + std::to_string(cfg.start_modes()) +
                           " modes exceeds the " + std::to_string(chain.size()) + " precomputed coefficients");

    MpsState psi = hooks.resume_state ? *hooks.resume_state : initial_state(model, start, cfg.fock_dim, cfg.max_bond);
    if (psi.ortho_center != 0) psi = orthogonalize(std::move(psi), 0);
    TdvpIntegrator integ(build_mpo(model, chain, psi.size() - 1, cfg.fock_dim), cfg.krylov);
    LightConeMonitor monitor;

    RunResult result;
    result.metadata["model"] = to_string(model.kind);
    if (std::isinf(chain.beta)) result.metadata["beta"] = "inf";
    else result.metadata["beta"] = chain.beta;
    result.metadata["chain_hash"] = chain.source_hash;

    const std::size_t nsteps = cfg.steps();
    const std::size_t first_step =
        hooks.resume_state ? static_cast<std::size_t>(std::llround(hooks.resume_time / cfg.dt)) : 0;
    std::vector<bool> corr_done(cfg.correlation_times.size(), false);

    auto record = [&](std::size_t step) {
        const double t = static_cast<double>(step) * cfg.dt;
        Sample s = measure(psi, integ.hamiltonian(), t, step);
        for (std::size_t k = 0; k < cfg.correlation_times.size(); ++k) {
            if (corr_done[k] || std::abs(cfg.correlation_times[k] - t) > 0.5 * cfg.dt * cfg.observable_stride) continue;
            corr_done[k] = true;
            result.correlation_matrices.emplace_back(t, chain_correlation_matrix(psi, 1, psi.size() - 1));
            s.correlation = &result.correlation_matrices.back().second;
        }
        result.times.push_back(t);
        result.sigma_x.push_back(s.sigma_x);
        result.sigma_y.push_back(s.sigma_y);
        result.sigma_z.push_back(s.sigma_z);
        result.chain_occupation.push_back(s.occupation);
        result.total_occupation.push_back(s.total_occupation);
        result.energy.push_back(s.energy);
        result.norm.push_back(s.norm);
        result.chain_length.push_back(s.chain_length);
        if (hooks.on_sample) hooks.on_sample(s);
    };

    if (first_step == 0) record(0);
    for (std::size_t step = first_step + 1; step <= nsteps; ++step) {
        integ.step(psi, cfg.dt);

        if (cfg.grow) {
            monitor.update(psi, cfg.growth_threshold);
            const std::size_t modes = psi.size() - 1;
            const std::size_t needed = monitor.front_position + cfg.growth_buffer;
            if (needed > modes) {
                if (needed > chain.size())
                    throw InvalidInput("run_evolution: light cone needs " + std::to_string(needed) +
                                       " chain modes but only " + std::to_string(chain.size()) +
                                       " coefficients were precomputed; compute a longer chain");
                append_vacuum_sites(psi, needed - modes, cfg.fock_dim, cfg.max_bond);
                psi = orthogonalize(std::move(psi), 0);
                integ.set_hamiltonian(build_mpo(model, chain, psi.size() - 1, cfg.fock_dim));
            }
        }

        if (step % cfg.observable_stride == 0 || step == nsteps) record(step);
        if (cfg.checkpoint_every > 0 && hooks.on_checkpoint && (step % cfg.checkpoint_every == 0 || step == nsteps))
            hooks.on_checkpoint(psi, static_cast<double>(step) * cfg.dt, step);
    }
    result.metadata["final_chain_length"] = psi.size() - 1;
    result.metadata["max_bond_reached"] = psi.max_bond();
    return result;
}

} // namespace ttedopa
