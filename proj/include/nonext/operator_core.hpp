#ifndef NONEXT_OPERATOR_CORE_HPP
#define NONEXT_OPERATOR_CORE_HPP

// Dense Hermitian-operator algebra: validated operators, density matrices,
// deterministic spectral decomposition, spectral functions, traces and
// tensor products. Everything is immutable after construction and all
// operations are pure, so the whole module is thread-safe.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nonext {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;

inline constexpr double kHermiticityTol = 1e-12;
inline constexpr double kEigenvalueClampTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Self-adjoint complex matrix; the carrier for Hamiltonians and all
/// observables. Construction validates Hermiticity elementwise.
class HermitianOperator {
public:
    explicit HermitianOperator(Matrix entries) : mat_(std::move(entries)) {
        if (mat_.rows() < 1 || mat_.rows() != mat_.cols()) {
            throw ValidationError("HermitianOperator: matrix must be square with dim >= 1");
        }
        for (Eigen::Index i = 0; i < mat_.rows(); ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                const double dev = std::abs(mat_(i, j) - std::conj(mat_(j, i)));
                if (dev > kHermiticityTol) {
                    throw ValidationError("HermitianOperator: entry (" + std::to_string(i) +
                                          "," + std::to_string(j) + ") breaks Hermiticity by " +
                                          std::to_string(dev));
                }
            }
        }
        // Symmetrize away the sub-tolerance residue so downstream spectral
        // routines see an exactly self-adjoint matrix.
        mat_ = ((mat_ + mat_.adjoint()) * 0.5).eval();
    }

    static HermitianOperator identity(Eigen::Index dim) {
        return HermitianOperator(Matrix::Identity(dim, dim));
    }

    static HermitianOperator diagonal(const std::vector<double>& d) {
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()),
                                static_cast<Eigen::Index>(d.size()));
        for (std::size_t i = 0; i < d.size(); ++i) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
        }
        return HermitianOperator(std::move(m));
    }

    Eigen::Index dim() const { return mat_.rows(); }
    const Matrix& mat() const { return mat_; }

private:
    Matrix mat_;
};

/// Eigenvalues ascending with a deterministic gauge: each eigenvector's
/// first nonzero component is made real positive, and degenerate clusters
/// are ordered lexicographically on the gauged entries.
struct SpectralDecomposition {
    Vector eigenvalues;   // ascending
    Matrix eigenvectors;  // orthonormal columns, paired with eigenvalues
};

namespace detail {

inline void fix_phase(Eigen::Ref<Eigen::VectorXcd> v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        const double a = std::abs(v(k));
        if (a > 1e-12) {
            v *= std::conj(v(k)) / a;
            return;
        }
    }
}

inline bool lex_less(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        if (a(k).real() != b(k).real()) return a(k).real() < b(k).real();
        if (a(k).imag() != b(k).imag()) return a(k).imag() < b(k).imag();
    }
    return false;
}

/// Deterministic gauge for an eigenvalue-ascending decomposition: fix each
/// column's phase and order degenerate clusters lexicographically.
inline void canonicalize(SpectralDecomposition& sd) {
    for (Eigen::Index c = 0; c < sd.eigenvectors.cols(); ++c) {
        detail::fix_phase(sd.eigenvectors.col(c));
    }
    const double scale = std::max(1.0, sd.eigenvalues.cwiseAbs().maxCoeff());
    Eigen::Index lo = 0;
    while (lo < sd.eigenvalues.size()) {
        Eigen::Index hi = lo + 1;
        while (hi < sd.eigenvalues.size() &&
               sd.eigenvalues(hi) - sd.eigenvalues(hi - 1) <= 1e-12 * scale) {
            ++hi;
        }
        for (Eigen::Index i = lo; i < hi; ++i) {
            for (Eigen::Index j = i + 1; j < hi; ++j) {
                if (detail::lex_less(sd.eigenvectors.col(j), sd.eigenvectors.col(i))) {
                    sd.eigenvectors.col(i).swap(sd.eigenvectors.col(j));
                    std::swap(sd.eigenvalues(i), sd.eigenvalues(j));
                }
            }
        }
        lo = hi;
    }
}

}  // namespace detail

inline SpectralDecomposition spectral_decompose(const HermitianOperator& A) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(A.mat());
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("spectral_decompose: eigensolver failed");
    }
    SpectralDecomposition sd{solver.eigenvalues(), solver.eigenvectors()};
    detail::canonicalize(sd);
    return sd;
}

inline double trace(const HermitianOperator& A) {
    const Complex t = A.mat().trace();
    if (std::abs(t.imag()) > 1e-12) {
        throw std::runtime_error("trace: imaginary residue " + std::to_string(t.imag()));
    }
    return t.real();
}

/// Positive semi-definite, unit-trace Hermitian operator. Eigenvalues with
/// |p| <= 1e-12 are clamped to exactly zero at construction (p^q for q < 1
/// amplifies decomposition noise on near-zero eigenvalues without bound, so
/// the support must be decided here, once); anything more negative is
/// rejected. The spectral decomposition is computed once and cached.
class DensityMatrix {
public:
    explicit DensityMatrix(HermitianOperator op) : op_(std::move(op)) {
        const double tr = trace(op_);
        if (std::abs(tr - 1.0) > kTraceTol) {
            throw ValidationError("DensityMatrix: trace deviates from 1 by " +
                                  std::to_string(tr - 1.0));
        }
        sd_ = spectral_decompose(op_);
        bool clamped = false;
        for (Eigen::Index i = 0; i < sd_.eigenvalues.size(); ++i) {
            const double p = sd_.eigenvalues(i);
            if (p < -kEigenvalueClampTol) {
                throw ValidationError("DensityMatrix: negative eigenvalue " + std::to_string(p));
            }
            if (p <= kEigenvalueClampTol) {
                if (p != 0.0) clamped = true;
                sd_.eigenvalues(i) = 0.0;
            }
        }
        if (clamped) {
            Matrix m = sd_.eigenvectors * sd_.eigenvalues.asDiagonal() *
                       sd_.eigenvectors.adjoint();
            op_ = HermitianOperator(std::move(m));
        }
    }

    static DensityMatrix maximally_mixed(Eigen::Index dim) {
        return DensityMatrix(HermitianOperator(
            Matrix::Identity(dim, dim) / static_cast<double>(dim)));
    }

    static DensityMatrix diagonal(const std::vector<double>& probs) {
        return DensityMatrix(HermitianOperator::diagonal(probs));
    }

    /// Build from probabilities and an orthonormal basis (columns). The
    /// given decomposition is kept as the cached spectrum instead of being
    /// recovered from the materialized matrix: eigensolver noise on
    /// near-zero probabilities is unbounded under p^s for s < 1, so the
    /// exact spectrum must survive when the caller already has it.
    static DensityMatrix from_spectrum(const Vector& probs, const Matrix& basis) {
        if (probs.size() != basis.cols() || basis.rows() != basis.cols()) {
            throw ValidationError("DensityMatrix::from_spectrum: shape mismatch");
        }
        const Matrix gram_dev =
            basis.adjoint() * basis - Matrix::Identity(basis.cols(), basis.cols());
        if (gram_dev.cwiseAbs().maxCoeff() > 1e-10) {
            throw ValidationError("DensityMatrix::from_spectrum: basis is not orthonormal");
        }
        SpectralDecomposition sd{probs, basis};
        for (Eigen::Index i = 0; i < sd.eigenvalues.size(); ++i) {
            const double p = sd.eigenvalues(i);
            if (p < -kEigenvalueClampTol) {
                throw ValidationError("DensityMatrix::from_spectrum: negative probability " +
                                      std::to_string(p));
            }
            if (p <= kEigenvalueClampTol) sd.eigenvalues(i) = 0.0;
        }
        if (std::abs(sd.eigenvalues.sum() - 1.0) > kTraceTol) {
            throw ValidationError("DensityMatrix::from_spectrum: probabilities sum to " +
                                  std::to_string(sd.eigenvalues.sum()));
        }
        // Ascending order with paired columns, then the deterministic gauge.
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(sd.eigenvalues.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<Eigen::Index>(k);
        std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
            return sd.eigenvalues(a) < sd.eigenvalues(b);
        });
        SpectralDecomposition sorted{Vector(sd.eigenvalues.size()),
                                     Matrix(basis.rows(), basis.cols())};
        for (std::size_t k = 0; k < idx.size(); ++k) {
            sorted.eigenvalues(static_cast<Eigen::Index>(k)) = sd.eigenvalues(idx[k]);
            sorted.eigenvectors.col(static_cast<Eigen::Index>(k)) = sd.eigenvectors.col(idx[k]);
        }
        detail::canonicalize(sorted);
        Matrix m = sorted.eigenvectors * sorted.eigenvalues.asDiagonal() *
                   sorted.eigenvectors.adjoint();
        return DensityMatrix(HermitianOperator(std::move(m)), std::move(sorted));
    }

    Eigen::Index dim() const { return op_.dim(); }
    const HermitianOperator& op() const { return op_; }
    const Matrix& mat() const { return op_.mat(); }
    const SpectralDecomposition& spectrum() const { return sd_; }
    const Vector& probabilities() const { return sd_.eigenvalues; }

private:
    /// Trusted path: the decomposition is taken as-is (from_spectrum has
    /// already clamped, sorted and gauged it).
    DensityMatrix(HermitianOperator op, SpectralDecomposition sd)
        : op_(std::move(op)), sd_(std::move(sd)) {}

    HermitianOperator op_;
    SpectralDecomposition sd_;
};

/// Spectral function f applied eigenvalue-wise.
template <typename F>
Matrix spectral_apply(const SpectralDecomposition& sd, F&& f) {
    Vector fv(sd.eigenvalues.size());
    for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(sd.eigenvalues(i));
    Matrix m = sd.eigenvectors * fv.asDiagonal() * sd.eigenvectors.adjoint();
    return ((m + m.adjoint()) * 0.5).eval();
}

/// rho^s with the convention 0^s = 0 (requires s > 0 so that it is the
/// continuous limit).
inline HermitianOperator matrix_power(const DensityMatrix& rho, double s) {
    if (!(s > 0.0)) {
        throw std::domain_error("matrix_power: exponent must be positive, got " +
                                std::to_string(s));
    }
    return HermitianOperator(spectral_apply(rho.spectrum(), [s](double p) {
        return p > 0.0 ? std::pow(p, s) : 0.0;
    }));
}

inline HermitianOperator kronecker(const HermitianOperator& A, const HermitianOperator& B) {
    const Eigen::Index na = A.dim(), nb = B.dim();
    Matrix out(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i) {
        for (Eigen::Index j = 0; j < na; ++j) {
            out.block(i * nb, j * nb, nb, nb) = A.mat()(i, j) * B.mat();
        }
    }
    return HermitianOperator(std::move(out));
}

inline DensityMatrix tensor_product(const DensityMatrix& A, const DensityMatrix& B) {
    return DensityMatrix(kronecker(A.op(), B.op()));
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.mat() - b.mat());
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace nonext

#endif  // NONEXT_OPERATOR_CORE_HPP
