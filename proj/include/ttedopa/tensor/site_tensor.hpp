// site_tensor.hpp: Rank-3 MPS site tensor A[s](l, r) with left/right matricizations

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace ttedopa {

using Index = Eigen::Index;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;

struct SiteTensor {
    std::vector<cmat> slices;   // slices[s] is D_left x D_right

    SiteTensor() = default;
    SiteTensor(Index dl, Index d, Index dr) : slices(static_cast<std::size_t>(d), cmat::Zero(dl, dr)) {}

    Index dl() const { return slices.empty() ? 0 : slices.front().rows(); }
    Index dr() const { return slices.empty() ? 0 : slices.front().cols(); }
    Index d() const { return static_cast<Index>(slices.size()); }
    Index size() const { return dl() * d() * dr(); }

    cmat& operator[](Index s) { return slices[static_cast<std::size_t>(s)]; }
    const cmat& operator[](Index s) const { return slices[static_cast<std::size_t>(s)]; }

    // (d*D_left) x D_right, row index s*D_left + l.
    cmat left_matrix() const {
        cmat m(d() * dl(), dr());
        for (Index s = 0; s < d(); ++s) m.middleRows(s * dl(), dl()) = (*this)[s];
        return m;
    }
    static SiteTensor from_left_matrix(const cmat& m, Index d) {
        const Index dl = m.rows() / d;
        SiteTensor t(dl, d, m.cols());
        for (Index s = 0; s < d; ++s) t[s] = m.middleRows(s * dl, dl);
        return t;
    }

    // D_left x (d*D_right), column index s*D_right + r.
    cmat right_matrix() const {
        cmat m(dl(), d() * dr());
        for (Index s = 0; s < d(); ++s) m.middleCols(s * dr(), dr()) = (*this)[s];
        return m;
    }
    static SiteTensor from_right_matrix(const cmat& m, Index d) {
        const Index dr = m.cols() / d;
        SiteTensor t(m.rows(), d, dr);
        for (Index s = 0; s < d; ++s) t[s] = m.middleCols(s * dr, dr);
        return t;
    }

    // Flattened as (s, r, l) with l fastest; the layout used by the checkpoint payload.
    cvec flatten() const {
        cvec v(size());
        Index k = 0;
        for (Index s = 0; s < d(); ++s)
            for (Index r = 0; r < dr(); ++r)
                for (Index l = 0; l < dl(); ++l) v(k++) = (*this)[s](l, r);
        return v;
    }
    static SiteTensor unflatten(const cvec& v, Index dl, Index d, Index dr) {
        SiteTensor t(dl, d, dr);
        Index k = 0;
        for (Index s = 0; s < d; ++s)
            for (Index r = 0; r < dr; ++r)
                for (Index l = 0; l < dl; ++l) t[s](l, r) = v(k++);
        return t;
    }

    double squared_norm() const {
        double n = 0.0;
        for (const auto& m : slices) n += m.squaredNorm();
        return n;
    }
    SiteTensor& operator*=(std::complex<double> f) {
        for (auto& m : slices) m *= f;
        return *this;
    }
};

} // namespace ttedopa
