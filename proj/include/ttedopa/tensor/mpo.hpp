// mpo.hpp: Finite-state-machine MPO for the system + nearest-neighbour chain Hamiltonian

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ttedopa/chainmap.hpp"
#include "ttedopa/errors.hpp"
#include "ttedopa/models.hpp"
#include "ttedopa/tensor/site_tensor.hpp"

namespace ttedopa {

// Non-zero operator entry W[w][v] of an MPO site.
struct MpoTerm {
    Index w;
    Index v;
    cmat op;
};

struct MpoSite {
    Index wl{1};
    Index wr{1};
    Index d{1};
    std::vector<MpoTerm> terms;
};

struct MpoHamiltonian {
    std::vector<MpoSite> sites;

    std::size_t size() const noexcept { return sites.size(); }
    Index bond_dim() const {
        Index b = 1;
        for (const auto& s : sites) b = std::max({b, s.wl, s.wr});
        return b;
    }
};

namespace ladder {
inline cmat annihilation(Index d) {
    cmat a = cmat::Zero(d, d);
    for (Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}
inline cmat creation(Index d) { return annihilation(d).adjoint(); }
inline cmat number(Index d) {
    cmat n = cmat::Zero(d, d);
    for (Index k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
    return n;
}
} // namespace ladder

// Bond states: 0 = nothing placed yet, 1 = c pending, 2 = c† pending, 3 = complete.
//   system site (1x4):  [ 1, κA_S, κA_S, H_S ]
//   chain site n (4x4): 1 on (0,0) and (3,3); t_n c† on (0,1); t_n c on (0,2); ω_n c†c on (0,3);
//                       c on (1,3); c† on (2,3)
//   last site (4x1):    column 3 of the above.
inline MpoHamiltonian build_mpo(const ModelSpec& model, const ChainCoefficients& chain, std::size_t n_modes, Index d) {
    if (n_modes < 1) throw InvalidInput("build_mpo: need at least one chain mode");
    if (d < 2) throw InvalidInput("build_mpo: Fock dimension must be >= 2");
    if (n_modes > chain.size())
        throw InvalidInput("build_mpo: " + std::to_string(n_modes) + " chain modes requested but only " +
                           std::to_string(chain.size()) + " coefficients available");

    const auto sys = system_matrices(model);
    const cmat c = ladder::annihilation(d);
    const cmat cd = ladder::creation(d);
    const cmat num = ladder::number(d);
    const cmat one = cmat::Identity(d, d);

    MpoHamiltonian h;
    MpoSite s0{1, 4, 2, {}};
    s0.terms.push_back({0, 0, cmat::Identity(2, 2)});
    s0.terms.push_back({0, 1, chain.kappa * cmat(sys.A_S)});
    s0.terms.push_back({0, 2, chain.kappa * cmat(sys.A_S)});
    s0.terms.push_back({0, 3, cmat(sys.H_S)});
    h.sites.push_back(std::move(s0));

    for (std::size_t n = 0; n < n_modes; ++n) {
        const bool last = n + 1 == n_modes;
        MpoSite s{4, last ? 1 : 4, d, {}};
        const Index done = last ? 0 : 3;
        s.terms.push_back({0, done, chain.omega[n] * num});
        s.terms.push_back({1, done, c});
        s.terms.push_back({2, done, cd});
        s.terms.push_back({3, done, one});
        if (!last) {
            s.terms.push_back({0, 0, one});
            s.terms.push_back({0, 1, chain.t[n] * cd});
            s.terms.push_back({0, 2, chain.t[n] * c});
        }
        h.sites.push_back(std::move(s));
    }
    return h;
}

// Dense matrix of the MPO, site 0 most significant. Only for small test systems.
inline cmat to_dense(const MpoHamiltonian& h) {
    // blocks[v] is the operator on the sites so far with right MPO bond v.
    std::vector<cmat> blocks(1, cmat::Ones(1, 1));
    for (const auto& site : h.sites) {
        const Index dim = blocks.front().rows() * site.d;
        std::vector<cmat> next(static_cast<std::size_t>(site.wr), cmat::Zero(dim, dim));
        for (const auto& t : site.terms) {
            const cmat& left = blocks[static_cast<std::size_t>(t.w)];
            cmat kron(dim, dim);
            for (Index i = 0; i < left.rows(); ++i)
                for (Index j = 0; j < left.cols(); ++j)
                    kron.block(i * site.d, j * site.d, site.d, site.d) = left(i, j) * t.op;
            next[static_cast<std::size_t>(t.v)] += kron;
        }
        blocks = std::move(next);
    }
    return blocks.front();
}

} // namespace ttedopa
