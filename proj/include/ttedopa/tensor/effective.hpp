// effective.hpp: MPO environments and the one-site / zero-site effective Hamiltonians

#pragma once

#include <vector>

#include "ttedopa/tensor/mpo.hpp"
#include "ttedopa/tensor/mps.hpp"

namespace ttedopa {

// One (bra x ket) matrix per MPO bond index.
using Environment = std::vector<cmat>;

inline Environment boundary_environment() { return Environment(1, cmat::Ones(1, 1)); }

// L'[v] = Σ_{w,s',s} W[w][v](s',s) A[s']† L[w] A[s]
inline Environment extend_left(const Environment& left, const SiteTensor& a, const MpoSite& w) {
    Environment out(static_cast<std::size_t>(w.wr), cmat::Zero(a.dr(), a.dr()));
    std::vector<std::vector<cmat>> la(static_cast<std::size_t>(w.wl));
    for (const auto& t : w.terms) {
        auto& cache = la[static_cast<std::size_t>(t.w)];
        if (cache.empty()) {
            cache.resize(static_cast<std::size_t>(a.d()));
            for (Index s = 0; s < a.d(); ++s) cache[static_cast<std::size_t>(s)] = left[static_cast<std::size_t>(t.w)] * a[s];
        }
        auto& dst = out[static_cast<std::size_t>(t.v)];
        for (Index sp = 0; sp < a.d(); ++sp) {
            cmat acc = cmat::Zero(a.dl(), a.dr());
            bool any = false;
            for (Index s = 0; s < a.d(); ++s) {
                const auto c = t.op(sp, s);
                if (c == 0.0) continue;
                acc += c * cache[static_cast<std::size_t>(s)];
                any = true;
            }
            if (any) dst.noalias() += a[sp].adjoint() * acc;
        }
    }
    return out;
}

// R'[w] = Σ_{v,s',s} W[w][v](s',s) conj(A[s']) R[v] A[s]^T
inline Environment extend_right(const Environment& right, const SiteTensor& a, const MpoSite& w) {
    Environment out(static_cast<std::size_t>(w.wl), cmat::Zero(a.dl(), a.dl()));
    std::vector<std::vector<cmat>> ra(static_cast<std::size_t>(w.wr));
    for (const auto& t : w.terms) {
        auto& cache = ra[static_cast<std::size_t>(t.v)];
        if (cache.empty()) {
            cache.resize(static_cast<std::size_t>(a.d()));
            for (Index s = 0; s < a.d(); ++s)
                cache[static_cast<std::size_t>(s)] = right[static_cast<std::size_t>(t.v)] * a[s].transpose();
        }
        auto& dst = out[static_cast<std::size_t>(t.w)];
        for (Index sp = 0; sp < a.d(); ++sp) {
            cmat acc = cmat::Zero(a.dr(), a.dl());
            bool any = false;
            for (Index s = 0; s < a.d(); ++s) {
                const auto c = t.op(sp, s);
                if (c == 0.0) continue;
                acc += c * cache[static_cast<std::size_t>(s)];
                any = true;
            }
            if (any) dst.noalias() += a[sp].conjugate() * acc;
        }
    }
    return out;
}

// (H A)[s'] = Σ_{w,v,s} W[w][v](s',s) L[w] A[s] R[v]^T
inline SiteTensor apply_one_site(const Environment& left, const MpoSite& w, const Environment& right,
                                 const SiteTensor& a) {
    SiteTensor out(a.dl(), a.d(), a.dr());
    std::vector<std::vector<cmat>> la(static_cast<std::size_t>(w.wl));
    for (const auto& t : w.terms) {
        auto& cache = la[static_cast<std::size_t>(t.w)];
        if (cache.empty()) {
            cache.resize(static_cast<std::size_t>(a.d()));
            for (Index s = 0; s < a.d(); ++s) cache[static_cast<std::size_t>(s)] = left[static_cast<std::size_t>(t.w)] * a[s];
        }
        const cmat rt = right[static_cast<std::size_t>(t.v)].transpose();
        for (Index sp = 0; sp < a.d(); ++sp) {
            cmat acc = cmat::Zero(a.dl(), a.dr());
            bool any = false;
            for (Index s = 0; s < a.d(); ++s) {
                const auto c = t.op(sp, s);
                if (c == 0.0) continue;
                acc += c * cache[static_cast<std::size_t>(s)];
                any = true;
            }
            if (any) out[sp].noalias() += acc * rt;
        }
    }
    return out;
}

// (H C) = Σ_w L[w] C R[w]^T for the bond matrix between two sites.
inline cmat apply_zero_site(const Environment& left, const Environment& right, const cmat& c) {
    cmat out = cmat::Zero(c.rows(), c.cols());
    for (std::size_t w = 0; w < left.size(); ++w) out.noalias() += left[w] * c * right[w].transpose();
    return out;
}

inline cvec as_vector(const SiteTensor& a) { return a.flatten(); }
inline SiteTensor as_tensor(const cvec& v, const SiteTensor& shape) {
    return SiteTensor::unflatten(v, shape.dl(), shape.d(), shape.dr());
}

// ⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩ by a left-to-right environment sweep.
inline double expectation(const MpsState& psi, const MpoHamiltonian& h) {
    if (psi.size() != h.size()) throw InvalidInput("expectation: MPS and MPO lengths differ");
    Environment env = boundary_environment();
    for (std::size_t i = 0; i < psi.size(); ++i) env = extend_left(env, psi.sites[i], h.sites[i]);
    const double nn = std::abs(overlap(psi, psi));
    return env.front()(0, 0).real() / nn;
}

} // namespace ttedopa
