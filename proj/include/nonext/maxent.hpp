#ifndef NONEXT_MAXENT_HPP
#define NONEXT_MAXENT_HPP

// Self-consistent nonextensive maximum-entropy equilibrium: the damped
// fixed-point solver for the q-deformed equilibrium state, the q = 1 Gibbs
// closed form, and the maximum-entropy-relation defect check.

#include "nonext/entropy.hpp"
#include "nonext/operator_core.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace nonext {

struct SolverConfig {
    double tol = 1e-10;
    int max_iter = 10000;
    double damping = 0.5;  // in (0, 1]; 1 = direct substitution
    enum class Init { maximally_mixed, gibbs_q1, custom };
    Init init = Init::gibbs_q1;
    std::optional<DensityMatrix> init_state;

    void validate() const {
        if (!(tol > 0.0)) throw ValidationError("SolverConfig: tol must be positive");
        if (!(damping > 0.0 && damping <= 1.0)) {
            throw ValidationError("SolverConfig: damping must lie in (0, 1]");
        }
        if (max_iter < 1) throw ValidationError("SolverConfig: max_iter must be >= 1");
        if (init == Init::custom && !init_state) {
            throw ValidationError("SolverConfig: custom init requires an init_state");
        }
    }
};

/// Solved equilibrium bundle. Invariants checked at construction time by
/// the solver: c_q = Z_q^{1-q} (relative 1e-8) and U_q consistent with the
/// escort expectation of the Hamiltonian.
struct EquilibriumState {
    DensityMatrix rho;
    HermitianOperator hamiltonian;
    double beta;
    double q;
    double Z_q;
    double c_q;
    double U_q;
    int iterations;
    double residual;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& msg, int iterations, double residual)
        : std::runtime_error(msg), iterations(iterations), residual(residual) {}
    int iterations;
    double residual;
};

/// Gibbs state exp(-beta H)/Tr exp(-beta H) in closed spectral form.
/// Z_q is reported in the energy-shifted convention Tr exp[-beta(H - U_1)],
/// so the q = 1 maximum-entropy relation holds with the stored fields.
inline EquilibriumState gibbs_state(const HermitianOperator& H, double beta) {
    const SpectralDecomposition sd = spectral_decompose(H);
    const double e_min = sd.eigenvalues.minCoeff();
    const double e_max = sd.eigenvalues.maxCoeff();
    if (std::abs(beta) * (e_max - e_min) > 700.0) {
        throw std::overflow_error("gibbs_state: beta * spectral spread exceeds exp range");
    }
    const double e_ref = beta >= 0.0 ? e_min : e_max;
    Vector w(sd.eigenvalues.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        w(i) = std::exp(-beta * (sd.eigenvalues(i) - e_ref));
    }
    const Vector p = w / w.sum();
    DensityMatrix rho = DensityMatrix::from_spectrum(p, sd.eigenvectors);
    const double u1 = p.dot(sd.eigenvalues);
    double z1 = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        z1 += std::exp(-beta * (sd.eigenvalues(i) - u1));
    }
    return EquilibriumState{std::move(rho), H, beta, 1.0, z1, 1.0, u1, 0, 0.0};
}

namespace detail {

/// One application of the equilibrium map for fixed (U, c): eigenvalue-wise
/// deformed-exponential weights with the Tsallis cutoff (bracket clamped at
/// zero before the 1/(1-q) power).
struct MapResult {
    Vector p;
    double Z;
    double U_new;
    double c_new;
};

inline MapResult equilibrium_map(const Vector& energies, double beta, double q, double U,
                                 double c) {
    const double one_minus_q = 1.0 - q;
    Vector w(energies.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double b = 1.0 - one_minus_q * beta * c * (energies(i) - U);
        w(i) = b > 0.0 ? std::pow(b, 1.0 / one_minus_q) : 0.0;
    }
    // Weights below the density-matrix clamp would be zeroed once the state
    // is materialized; truncate them here already so (U, c, Z) and every
    // functional of the returned state agree on the support.
    const double w_total = w.sum();
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) <= kEigenvalueClampTol * w_total) w(i) = 0.0;
    }
    const double Z = w.sum();
    if (!(Z > 0.0) || !std::isfinite(Z)) {
        throw SolverError("solve_equilibrium: degenerate weights (Z = " + std::to_string(Z) +
                          ")", 0, std::numeric_limits<double>::quiet_NaN());
    }
    MapResult r;
    r.p = w / Z;
    r.Z = Z;
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < r.p.size(); ++i) {
        if (r.p(i) > 0.0) {
            const double pq = std::pow(r.p(i), q);
            num += pq * energies(i);
            den += pq;
        }
    }
    r.U_new = num / den;
    r.c_new = den;
    return r;
}

}  // namespace detail

/// Damped fixed-point solve of the self-consistent (U_q, c_q) system. The
/// equilibrium state shares the Hamiltonian eigenbasis, so the iteration
/// runs on the probability vector in that basis.
inline EquilibriumState solve_equilibrium(const HermitianOperator& H, double beta,
                                          const EntropicIndex& q,
                                          const SolverConfig& cfg = {}) {
    cfg.validate();
    if (q.near_one()) return gibbs_state(H, beta);

    const SpectralDecomposition sd = spectral_decompose(H);
    const Vector& energies = sd.eigenvalues;
    const Eigen::Index n = energies.size();

    Vector p0;
    switch (cfg.init) {
        case SolverConfig::Init::maximally_mixed:
            p0 = Vector::Constant(n, 1.0 / static_cast<double>(n));
            break;
        case SolverConfig::Init::custom:
            p0.resize(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const Complex d = sd.eigenvectors.col(i).adjoint() *
                                  cfg.init_state->mat() * sd.eigenvectors.col(i);
                p0(i) = std::max(d.real(), 0.0);
            }
            p0 /= p0.sum();
            break;
        case SolverConfig::Init::gibbs_q1:
        default: {
            const double e_ref = beta >= 0.0 ? energies.minCoeff() : energies.maxCoeff();
            if (std::abs(beta) * (energies.maxCoeff() - energies.minCoeff()) > 700.0) {
                p0 = Vector::Constant(n, 1.0 / static_cast<double>(n));
            } else {
                p0.resize(n);
                for (Eigen::Index i = 0; i < n; ++i) {
                    p0(i) = std::exp(-beta * (energies(i) - e_ref));
                }
                p0 /= p0.sum();
            }
            break;
        }
    }

    double U = 0.0, c = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (p0(i) > 0.0) {
            const double pq = std::pow(p0(i), q.value());
            U += pq * energies(i);
            c += pq;
        }
    }
    U /= c;

    Vector p_prev = p0;
    double residual = std::numeric_limits<double>::infinity();
    double Z = 0.0;
    int iter = 0;
    for (; iter < cfg.max_iter; ++iter) {
        const auto m = detail::equilibrium_map(energies, beta, q.value(), U, c);
        residual = std::max({std::abs(m.U_new - U), std::abs(m.c_new - c),
                             0.5 * (m.p - p_prev).cwiseAbs().sum()});
        Z = m.Z;
        p_prev = m.p;
        if (residual < cfg.tol) {
            U = m.U_new;
            c = m.c_new;
            break;
        }
        U += cfg.damping * (m.U_new - U);
        c += cfg.damping * (m.c_new - c);
    }
    if (residual >= cfg.tol) {
        throw SolverError("solve_equilibrium: no convergence after " +
                          std::to_string(cfg.max_iter) + " iterations, residual " +
                          std::to_string(residual), cfg.max_iter, residual);
    }

    DensityMatrix rho = DensityMatrix::from_spectrum(p_prev, sd.eigenvectors);
    EquilibriumState eq{std::move(rho), H, beta, q.value(), Z, c, U, iter + 1, residual};

    const double id_dev = std::abs(eq.c_q - std::pow(eq.Z_q, 1.0 - q.value())) / eq.c_q;
    if (id_dev > 1e-8) {
        throw SolverError("solve_equilibrium: partition identity c_q = Z_q^{1-q} violated "
                          "(relative deviation " + std::to_string(id_dev) + ")",
                          eq.iterations, eq.residual);
    }
    const double u_dev = std::abs(escort_expectation(eq.rho, H, q) - eq.U_q);
    if (u_dev > 1e-8) {
        throw SolverError("solve_equilibrium: escort energy inconsistent by " +
                          std::to_string(u_dev), eq.iterations, eq.residual);
    }
    return eq;
}

/// Trace distance between the fixed points reached from the two standard
/// initializations; a diagnostic for non-uniqueness.
inline double multistart_disagreement(const HermitianOperator& H, double beta,
                                      const EntropicIndex& q, SolverConfig cfg = {}) {
    cfg.init = SolverConfig::Init::gibbs_q1;
    const EquilibriumState a = solve_equilibrium(H, beta, q, cfg);
    cfg.init = SolverConfig::Init::maximally_mixed;
    const EquilibriumState b = solve_equilibrium(H, beta, q, cfg);
    return trace_distance(a.rho, b.rho);
}

struct MaxentRelationResult {
    double defect;  // K - [S(rho_eq) - S(rho) + beta (<H>_q - U_q)]
    double K;       // q-KL divergence from rho to the equilibrium state
};

/// Defect of the generalized maximum-entropy relation: zero up to solver
/// accuracy whenever rho is supported inside the equilibrium support. A
/// support violation propagates the infinite-divergence signal.
inline MaxentRelationResult maxent_relation_defect(const DensityMatrix& rho,
                                                   const EquilibriumState& eq) {
    const EntropicIndex q(eq.q);
    const double K = q.near_one() ? kl_divergence(rho, eq.rho)
                                  : q_kl_divergence(rho, eq.rho, q);
    if (std::isinf(K)) return {kInfiniteDivergence, K};
    const double s_eq = tsallis_entropy_normalized(eq.rho, q);
    const double s_rho = tsallis_entropy_normalized(rho, q);
    const double rhs = s_eq - s_rho +
                       eq.beta * (escort_expectation(rho, eq.hamiltonian, q) - eq.U_q);
    return {K - rhs, K};
}

namespace detail {

/// Same defect evaluated with the unnormalized (original Tsallis) forms;
/// the relation is expected to break, which is exactly what the negative
/// control demonstrates.
inline double maxent_relation_defect_unnormalized(const DensityMatrix& rho,
                                                  const EquilibriumState& eq) {
    const EntropicIndex q(eq.q);
    const double K = q_kl_unnormalized(rho, eq.rho, q);
    if (std::isinf(K)) return kInfiniteDivergence;
    const double s_eq = tsallis_entropy_unnormalized(eq.rho, q);
    const double s_rho = tsallis_entropy_unnormalized(rho, q);
    const double rhs = s_eq - s_rho +
                       eq.beta * (escort_numerator(rho, eq.hamiltonian, q.value()) -
                                  escort_numerator(eq.rho, eq.hamiltonian, q.value()));
    return K - rhs;
}

}  // namespace detail

}  // namespace nonext

#endif  // NONEXT_MAXENT_HPP
