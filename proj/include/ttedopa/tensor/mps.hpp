// mps.hpp: Matrix product states: construction, gauge moves, contraction

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ttedopa/errors.hpp"
#include "ttedopa/tensor/site_tensor.hpp"

namespace ttedopa {

struct MpsState {
    std::vector<SiteTensor> sites;
    std::size_t ortho_center{0};
    double log_norm{0.0};

    std::size_t size() const noexcept { return sites.size(); }

    std::vector<Index> local_dims() const {
        std::vector<Index> d;
        d.reserve(sites.size());
        for (const auto& s : sites) d.push_back(s.d());
        return d;
    }
    std::vector<Index> bond_dims() const {
        std::vector<Index> b;
        for (std::size_t i = 0; i + 1 < sites.size(); ++i) b.push_back(sites[i].dr());
        return b;
    }
    Index max_bond() const {
        Index m = 1;
        for (Index b : bond_dims()) m = std::max(m, b);
        return m;
    }
};

// Largest useful dimension of each bond given the local dimensions and a cap.
inline std::vector<Index> bond_caps(const std::vector<Index>& dims, Index max_bond) {
    const std::size_t n = dims.size();
    std::vector<Index> caps(n > 0 ? n - 1 : 0, 1);
    constexpr double big = 1e12;
    double left = 1.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        left = std::min(big, left * static_cast<double>(dims[k]));
        double right = 1.0;
        for (std::size_t j = k + 1; j < n && right < big; ++j) right *= static_cast<double>(dims[j]);
        caps[k] = static_cast<Index>(std::min({left, right, static_cast<double>(max_bond)}));
    }
    return caps;
}

namespace detail {

// Thin QR with R's diagonal made real and non-negative, so isometries are fixed points.
// Columns whose R pivot is at rounding level would come out as normalized noise; they are replaced by unit
// vectors independent of the rest, so unused (zero-padded) bond directions stay deterministic and local.
// Rows are indexed s*block + b; candidates run over b outer, s inner, so a local excitation next to the
// bond is preferred over one further out. R is then Q†m, which drops at most the rounding-level remainder.
inline void thin_qr(const cmat& m, cmat& q, cmat& r, Index block = 0) {
    const Index k = m.cols();
    Eigen::HouseholderQR<cmat> qr(m);
    q = qr.householderQ() * cmat::Identity(m.rows(), k);
    r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    const double floor = 1e-11 * m.norm();
    std::vector<Index> weak;
    for (Index j = 0; j < k; ++j) {
        const auto d = r(j, j);
        const double a = std::abs(d);
        if (!(a > floor)) {
            weak.push_back(j);
            continue;
        }
        const auto ph = d / a;
        q.col(j) *= ph;
        r.row(j) *= std::conj(ph);
    }
    if (weak.empty()) return;

    std::vector<bool> kept(static_cast<std::size_t>(k), true);
    for (Index j : weak) kept[static_cast<std::size_t>(j)] = false;
    if (block <= 0) block = m.rows();
    const Index d = m.rows() / block;
    Index next = 0;
    for (Index j : weak) {
        for (; next < m.rows(); ++next) {
            cvec v = cvec::Zero(m.rows());
            v((next % d) * block + next / d) = 1.0;
            for (int pass = 0; pass < 2; ++pass)
                for (Index c = 0; c < k; ++c)
                    if (kept[static_cast<std::size_t>(c)]) v -= q.col(c).dot(v) * q.col(c);
            const double n = v.norm();
            if (n > 0.5) {
                q.col(j) = v / n;
                kept[static_cast<std::size_t>(j)] = true;
                ++next;
                break;
            }
        }
    }
    r = q.adjoint() * m;
}

} // namespace detail

// Left-gauge site i (QR) and push the non-isometric factor into site i+1.
inline void move_center_right(MpsState& psi, std::size_t i) {
    auto& a = psi.sites[i];
    cmat q, r;
    detail::thin_qr(a.left_matrix(), q, r, a.dl());
    a = SiteTensor::from_left_matrix(q, a.d());
    auto& b = psi.sites[i + 1];
    for (auto& s : b.slices) s = r * s;
}

// Right-gauge site i (LQ via QR of the adjoint) and push the factor into site i-1.
inline void move_center_left(MpsState& psi, std::size_t i) {
    auto& a = psi.sites[i];
    cmat q, r;
    detail::thin_qr(a.right_matrix().adjoint(), q, r, a.dr());
    a = SiteTensor::from_right_matrix(q.adjoint(), a.d());
    auto& b = psi.sites[i - 1];
    const cmat l = r.adjoint();
    for (auto& s : b.slices) s = s * l;
}

// Full gauge sweep: sites left of `center` become left isometries, sites right of it right isometries.
inline MpsState orthogonalize(MpsState psi, std::size_t center) {
    if (center >= psi.size()) throw InvalidInput("orthogonalize: center out of range");
    for (std::size_t i = 0; i < center; ++i) move_center_right(psi, i);
    for (std::size_t i = psi.size() - 1; i > center; --i) move_center_left(psi, i);
    psi.ortho_center = center;
    return psi;
}

// Product state ⊗_i |v_i⟩ embedded in bonds padded with zeros up to min(max_bond, caps) and brought to
// canonical form with center 0. The padding directions give the one-site integrator room to entangle.
inline MpsState product_state(const std::vector<cvec>& local, Index max_bond = 1) {
    if (local.empty()) throw InvalidInput("product_state: no sites");
    std::vector<Index> dims;
    for (const auto& v : local) dims.push_back(v.size());
    const auto caps = bond_caps(dims, std::max<Index>(1, max_bond));
    MpsState psi;
    const std::size_t n = local.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Index dl = i == 0 ? 1 : caps[i - 1];
        const Index dr = i + 1 == n ? 1 : caps[i];
        SiteTensor t(dl, dims[i], dr);
        for (Index s = 0; s < dims[i]; ++s) t[s](0, 0) = local[i](s);
        psi.sites.push_back(std::move(t));
    }
    psi.ortho_center = n - 1;
    return orthogonalize(std::move(psi), 0);
}

inline cvec basis_vector(Index d, Index k) {
    cvec v = cvec::Zero(d);
    v(k) = 1.0;
    return v;
}

// Transfer-matrix contraction ⟨a|b⟩.
inline std::complex<double> overlap(const MpsState& a, const MpsState& b) {
    if (a.size() != b.size()) throw InvalidInput("overlap: MPS lengths differ");
    cmat e = cmat::Ones(1, 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& x = a.sites[i];
        const auto& y = b.sites[i];
        if (x.d() != y.d()) throw InvalidInput("overlap: local dimensions differ");
        cmat next = cmat::Zero(x.dr(), y.dr());
        for (Index s = 0; s < x.d(); ++s) next.noalias() += x[s].adjoint() * e * y[s];
        e = std::move(next);
    }
    return e(0, 0);
}

inline double norm(const MpsState& psi) {
    if (psi.ortho_center < psi.size()) {
        // Valid when the gauge bookkeeping holds; the generic route is overlap().
        return std::sqrt(psi.sites[psi.ortho_center].squared_norm());
    }
    return std::sqrt(std::abs(overlap(psi, psi)));
}

// Dense state vector, site 0 most significant.
inline cvec to_dense(const MpsState& psi) {
    cmat acc = cmat::Ones(1, 1);
    for (const auto& a : psi.sites) {
        cmat next(acc.rows() * a.d(), a.dr());
        for (Index row = 0; row < acc.rows(); ++row)
            for (Index s = 0; s < a.d(); ++s) next.row(row * a.d() + s) = acc.row(row) * a[s];
        acc = std::move(next);
    }
    return acc.col(0);
}

// Zero-pad every bond up to min(max_bond, caps). The represented state is unchanged; the gauge is
// restored around the current center.
inline void pad_bonds(MpsState& psi, Index max_bond) {
    const auto caps = bond_caps(psi.local_dims(), max_bond);
    bool changed = false;
    for (std::size_t k = 0; k + 1 < psi.size(); ++k) {
        const Index cur = psi.sites[k].dr();
        if (cur >= caps[k]) continue;
        changed = true;
        for (auto& s : psi.sites[k].slices) {
            cmat w = cmat::Zero(s.rows(), caps[k]);
            w.leftCols(cur) = s;
            s = std::move(w);
        }
        for (auto& s : psi.sites[k + 1].slices) {
            cmat w = cmat::Zero(caps[k], s.cols());
            w.topRows(cur) = s;
            s = std::move(w);
        }
    }
    if (changed) psi = orthogonalize(std::move(psi), psi.ortho_center);
}

// Append vacuum sites on the right, padding bonds so the new sites can become entangled.
inline void append_vacuum_sites(MpsState& psi, std::size_t count, Index d, Index max_bond) {
    for (std::size_t k = 0; k < count; ++k) {
        SiteTensor t(psi.sites.back().dr(), d, 1);
        t[0](0, 0) = 1.0;
        psi.sites.push_back(std::move(t));
    }
    pad_bonds(psi, max_bond);
}

} // namespace ttedopa
