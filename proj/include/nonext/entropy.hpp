#ifndef NONEXT_ENTROPY_HPP
#define NONEXT_ENTROPY_HPP

// Scalar and state functionals: q-logarithm, von Neumann and normalized
// Tsallis entropies, KL and q-KL divergences, escort expectations and the
// algebraic-identity defects (pseudo-additivity, Jackson q-derivative,
// Jackson basic numbers).

#include "nonext/operator_core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nonext {

/// Nonextensivity parameter. The near-one branch is decided here, in one
/// place, so every formula that degenerates at q = 1 switches consistently.
class EntropicIndex {
public:
    explicit EntropicIndex(double q) : q_(q) {
        if (!(q > 0.0)) {
            throw std::domain_error("EntropicIndex: q must be positive, got " +
                                    std::to_string(q));
        }
    }

    double value() const { return q_; }
    bool near_one() const { return std::abs(q_ - 1.0) < 1e-6; }

private:
    double q_;
};

/// Distinguished infinite-divergence signal. Scans record it instead of
/// aborting; it is not a numeric overflow.
inline constexpr double kInfiniteDivergence = std::numeric_limits<double>::infinity();

/// Eigenvalues below this are treated as outside the support.
inline constexpr double kSupportTol = 1e-14;

/// Deformed logarithm (x^{q-1} - 1)/(q - 1). Near q = 1 the direct form
/// cancels catastrophically, so a second-order series in (q-1) is used.
inline double ln_q(double x, const EntropicIndex& q) {
    if (!(x > 0.0)) {
        throw std::domain_error("ln_q: argument must be positive, got " + std::to_string(x));
    }
    if (q.near_one()) {
        const double lx = std::log(x);
        return lx + 0.5 * (q.value() - 1.0) * lx * lx;
    }
    return (std::pow(x, q.value() - 1.0) - 1.0) / (q.value() - 1.0);
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
    double s = 0.0;
    for (double p : rho.probabilities()) {
        if (p > kSupportTol) s -= p * std::log(p);
    }
    return s;
}

namespace detail {

/// Tr(rho^q) from the cached spectrum.
inline double c_q(const DensityMatrix& rho, double q) {
    double c = 0.0;
    for (double p : rho.probabilities()) {
        if (p > kSupportTol) c += std::pow(p, q);
    }
    return c;
}

/// Original (unnormalized) Tsallis entropy Tr(rho^q Ln_q rho^{-1}); kept
/// internal, used only to contrast against the normalized form.
inline double tsallis_entropy_unnormalized(const DensityMatrix& rho, const EntropicIndex& q) {
    if (q.near_one()) return von_neumann_entropy(rho);
    double s = 0.0;
    for (double p : rho.probabilities()) {
        if (p > kSupportTol) s += (p - std::pow(p, q.value())) / (q.value() - 1.0);
    }
    return s;
}

/// Tr[rho^q rho'^{1-q}] as a genuine matrix trace through both spectra.
/// Returns the infinite signal when q > 1 and support(rho) escapes
/// support(rho').
inline double cross_trace(const DensityMatrix& rho, const DensityMatrix& rho_p, double q) {
    const auto& sd = rho.spectrum();
    const auto& sdp = rho_p.spectrum();
    const Matrix overlap = sd.eigenvectors.adjoint() * sdp.eigenvectors;
    double t = 0.0;
    for (Eigen::Index a = 0; a < sd.eigenvalues.size(); ++a) {
        const double p = sd.eigenvalues(a);
        if (p <= kSupportTol) continue;
        for (Eigen::Index b = 0; b < sdp.eigenvalues.size(); ++b) {
            const double w = std::norm(overlap(a, b));
            if (w <= 1e-24) continue;
            const double pp = sdp.eigenvalues(b);
            if (pp <= kSupportTol) {
                if (q > 1.0) return kInfiniteDivergence;
                continue;  // 0^{1-q} = 0 for q < 1
            }
            t += std::pow(p, q) * std::pow(pp, 1.0 - q) * w;
        }
    }
    return t;
}

/// True when rho has weight outside the support of rho_p.
inline bool support_violated(const DensityMatrix& rho, const DensityMatrix& rho_p) {
    const auto& sd = rho.spectrum();
    const auto& sdp = rho_p.spectrum();
    const Matrix overlap = sd.eigenvectors.adjoint() * sdp.eigenvectors;
    for (Eigen::Index a = 0; a < sd.eigenvalues.size(); ++a) {
        if (sd.eigenvalues(a) <= kSupportTol) continue;
        for (Eigen::Index b = 0; b < sdp.eigenvalues.size(); ++b) {
            if (sdp.eigenvalues(b) <= kSupportTol && std::norm(overlap(a, b)) > 1e-12) {
                return true;
            }
        }
    }
    return false;
}

}  // namespace detail

/// Normalized Tsallis entropy Tr(rho^q Ln_q rho^{-1}) / Tr(rho^q).
/// Computed as the spectral sum and cross-checked against the closed form
/// (1 - 1/c_q)/(1 - q); the two must agree to 1e-12.
inline double tsallis_entropy_normalized(const DensityMatrix& rho, const EntropicIndex& q) {
    if (q.near_one()) return von_neumann_entropy(rho);
    const double c = detail::c_q(rho, q.value());
    const double s = detail::tsallis_entropy_unnormalized(rho, q) / c;
    const double closed = (1.0 - 1.0 / c) / (1.0 - q.value());
    // Both routes divide a rounded quantity by (q - 1), so the agreement
    // check loosens accordingly as q approaches the near-one window.
    const double agree_tol = 1e-12 + 1e-14 / std::abs(q.value() - 1.0);
    if (std::abs(s - closed) > agree_tol) {
        throw std::runtime_error("tsallis_entropy_normalized: spectral sum and closed form "
                                 "disagree by " + std::to_string(s - closed));
    }
    return s;
}

/// Tr[rho (ln rho - ln rho')]; infinite-divergence signal when the support
/// of rho is not contained in that of rho'.
inline double kl_divergence(const DensityMatrix& rho, const DensityMatrix& rho_p) {
    if (rho.dim() != rho_p.dim()) {
        throw ValidationError("kl_divergence: dimension mismatch");
    }
    if (detail::support_violated(rho, rho_p)) return kInfiniteDivergence;
    const auto& sd = rho.spectrum();
    const auto& sdp = rho_p.spectrum();
    const Matrix overlap = sd.eigenvectors.adjoint() * sdp.eigenvectors;
    double k = 0.0;
    for (Eigen::Index a = 0; a < sd.eigenvalues.size(); ++a) {
        const double p = sd.eigenvalues(a);
        if (p <= kSupportTol) continue;
        k += p * std::log(p);
        for (Eigen::Index b = 0; b < sdp.eigenvalues.size(); ++b) {
            const double w = std::norm(overlap(a, b));
            const double pp = sdp.eigenvalues(b);
            if (w <= 1e-24 || pp <= kSupportTol) continue;
            k -= p * w * std::log(pp);
        }
    }
    return k;
}

/// q-deformed relative entropy
/// Tr[rho^q (Ln_q rho'^{-1} - Ln_q rho^{-1})] / Tr(rho^q), evaluated as
/// (Tr[rho^q rho'^{1-q}] - 1)/((q - 1) c_q). Non-negative for every q > 0;
/// finite for q < 1 even under support mismatch.
inline double q_kl_divergence(const DensityMatrix& rho, const DensityMatrix& rho_p,
                              const EntropicIndex& q) {
    if (rho.dim() != rho_p.dim()) {
        throw ValidationError("q_kl_divergence: dimension mismatch");
    }
    if (q.near_one()) return kl_divergence(rho, rho_p);
    if (q.value() >= 1.0 && detail::support_violated(rho, rho_p)) return kInfiniteDivergence;
    const double t = detail::cross_trace(rho, rho_p, q.value());
    if (std::isinf(t)) return kInfiniteDivergence;
    const double c = detail::c_q(rho, q.value());
    return (t - 1.0) / ((q.value() - 1.0) * c);
}

/// Normalized q-expectation Tr(rho^q A)/Tr(rho^q); the ordinary expectation
/// at q = 1.
inline double escort_expectation(const DensityMatrix& rho, const HermitianOperator& A,
                                 const EntropicIndex& q) {
    if (rho.dim() != A.dim()) {
        throw ValidationError("escort_expectation: dimension mismatch");
    }
    const auto& sd = rho.spectrum();
    double num = 0.0, den = 0.0;
    for (Eigen::Index a = 0; a < sd.eigenvalues.size(); ++a) {
        const double p = sd.eigenvalues(a);
        if (p <= kSupportTol) continue;
        const double w = std::pow(p, q.value());
        const Complex diag = sd.eigenvectors.col(a).adjoint() * A.mat() * sd.eigenvectors.col(a);
        num += w * diag.real();
        den += w;
    }
    return num / den;
}

namespace detail {

/// Unnormalized escort numerator Tr(rho^q A); negative-control companion of
/// escort_expectation.
inline double escort_numerator(const DensityMatrix& rho, const HermitianOperator& A, double q) {
    const auto& sd = rho.spectrum();
    double num = 0.0;
    for (Eigen::Index a = 0; a < sd.eigenvalues.size(); ++a) {
        const double p = sd.eigenvalues(a);
        if (p <= kSupportTol) continue;
        const Complex diag = sd.eigenvectors.col(a).adjoint() * A.mat() * sd.eigenvectors.col(a);
        num += std::pow(p, q) * diag.real();
    }
    return num;
}

/// Unnormalized q-KL Tr[rho^q (Ln_q rho'^{-1} - Ln_q rho^{-1})].
inline double q_kl_unnormalized(const DensityMatrix& rho, const DensityMatrix& rho_p,
                                const EntropicIndex& q) {
    if (q.near_one()) return kl_divergence(rho, rho_p);
    if (q.value() >= 1.0 && support_violated(rho, rho_p)) return kInfiniteDivergence;
    const double t = cross_trace(rho, rho_p, q.value());
    if (std::isinf(t)) return kInfiniteDivergence;
    return (t - 1.0) / (q.value() - 1.0);
}

}  // namespace detail

/// S_q[A (x) B] - S_q[A] - S_q[B] - (q-1) S_q[A] S_q[B]; zero up to rounding.
inline double pseudo_additivity_defect(const DensityMatrix& rho_a, const DensityMatrix& rho_b,
                                       const EntropicIndex& q) {
    const double sab = tsallis_entropy_normalized(tensor_product(rho_a, rho_b), q);
    const double sa = tsallis_entropy_normalized(rho_a, q);
    const double sb = tsallis_entropy_normalized(rho_b, q);
    return sab - sa - sb - (q.value() - 1.0) * sa * sb;
}

/// Jackson q-derivative of f(x) = 1/Tr(rho^x) at x = 1; coincides with the
/// normalized Tsallis entropy, and with the von Neumann entropy in the
/// near-one branch (central difference there is exercised in tests only).
inline double jackson_q_derivative_entropy(const DensityMatrix& rho, const EntropicIndex& q) {
    if (q.near_one()) return von_neumann_entropy(rho);
    const double f_q = 1.0 / detail::c_q(rho, q.value());
    const double f_1 = 1.0 / detail::c_q(rho, 1.0);
    return (f_q - f_1) / (q.value() - 1.0);
}

/// Jackson basic number [A]_q = (q^A - 1)/(q - 1); A itself in the limit.
inline double jackson_basic_number(double a, const EntropicIndex& q) {
    if (q.near_one()) return a;
    return (std::pow(q.value(), a) - 1.0) / (q.value() - 1.0);
}

/// [A+B]_q - [A]_q - [B]_q - (q-1)[A]_q [B]_q.
inline double basic_number_identity_defect(double a, double b, const EntropicIndex& q) {
    const double na = jackson_basic_number(a, q);
    const double nb = jackson_basic_number(b, q);
    return jackson_basic_number(a + b, q) - na - nb - (q.value() - 1.0) * na * nb;
}

}  // namespace nonext

#endif  // NONEXT_ENTROPY_HPP
