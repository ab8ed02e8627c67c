// models.hpp: System Hamiltonians, coupling operators and initial states

#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "ttedopa/errors.hpp"

namespace ttedopa {

// Basis convention: σ_z = diag(1, -1), |↑⟩ = (1, 0).
namespace pauli {
inline Eigen::Matrix2cd identity() { return Eigen::Matrix2cd::Identity(); }
inline Eigen::Matrix2cd x() { Eigen::Matrix2cd m; m << 0, 1, 1, 0; return m; }
inline Eigen::Matrix2cd y() {
    Eigen::Matrix2cd m;
    m << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0;
    return m;
}
inline Eigen::Matrix2cd z() { Eigen::Matrix2cd m; m << 1, 0, 0, -1; return m; }
} // namespace pauli

enum class ModelKind { IBM, SBM, ElectronTransfer };

inline std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::IBM: return "ibm";
        case ModelKind::SBM: return "sbm";
        case ModelKind::ElectronTransfer: return "et";
    }
    return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
    if (s == "ibm" || s == "IBM") return ModelKind::IBM;
    if (s == "sbm" || s == "SBM") return ModelKind::SBM;
    if (s == "et" || s == "ET" || s == "electron_transfer") return ModelKind::ElectronTransfer;
    throw InvalidInput("unknown model kind '" + s + "' (expected ibm, sbm or et)");
}

struct ModelSpec {
    ModelKind kind{ModelKind::IBM};
    double omega_0{0.2};        // TLS gap (IBM, SBM)
    double epsilon{0.2};        // electronic coupling (ET)
    double alpha{0.1};          // bath coupling strength
    double omega_c{1.0};
    std::optional<Eigen::Vector2cd> initial_state;   // overrides the model default when set

    // λ_R = 2αω_c for the Ohmic bath.
    double lambda_R() const noexcept { return 2.0 * alpha * omega_c; }

    static ModelSpec ibm(double omega_0 = 0.2, double alpha = 0.1) {
        ModelSpec m;
        m.kind = ModelKind::IBM;
        m.omega_0 = omega_0;
        m.alpha = alpha;
        return m;
    }
    static ModelSpec sbm(double omega_0 = 0.2, double alpha = 0.1) {
        ModelSpec m = ibm(omega_0, alpha);
        m.kind = ModelKind::SBM;
        return m;
    }
    static ModelSpec electron_transfer(double epsilon = 0.2, double alpha = 0.8) {
        ModelSpec m;
        m.kind = ModelKind::ElectronTransfer;
        m.epsilon = epsilon;
        m.alpha = alpha;
        return m;
    }
};

struct SystemMatrices {
    Eigen::Matrix2cd H_S;
    Eigen::Matrix2cd A_S;
};

inline SystemMatrices system_matrices(const ModelSpec& m) {
    const Eigen::Matrix2cd one = pauli::identity();
    switch (m.kind) {
        case ModelKind::IBM:
            return {0.5 * m.omega_0 * pauli::z(), pauli::z()};
        case ModelKind::SBM:
            return {0.5 * m.omega_0 * pauli::z(), pauli::x()};
        case ModelKind::ElectronTransfer: {
            const Eigen::Matrix2cd proj = 0.5 * (one + pauli::x());
            return {0.5 * m.epsilon * pauli::z() + m.lambda_R() * proj, proj};
        }
    }
    throw InvalidInput("system_matrices: unknown model kind");
}

// IBM: (|↑⟩+|↓⟩)/√2; SBM: |↑⟩; ET: reactant |↓_x⟩ = (|↑⟩-|↓⟩)/√2.
inline Eigen::Vector2cd initial_system_state(const ModelSpec& m) {
    if (m.initial_state) {
        const double n = m.initial_state->norm();
        if (!(n > 0.0)) throw InvalidInput("initial_state must be non-zero");
        return *m.initial_state / n;
    }
    const double r = 1.0 / std::sqrt(2.0);
    switch (m.kind) {
        case ModelKind::IBM: return Eigen::Vector2cd(r, r);
        case ModelKind::SBM: return Eigen::Vector2cd(1.0, 0.0);
        case ModelKind::ElectronTransfer: return Eigen::Vector2cd(r, -r);
    }
    throw InvalidInput("initial_system_state: unknown model kind");
}

} // namespace ttedopa
