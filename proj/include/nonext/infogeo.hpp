#ifndef NONEXT_INFOGEO_HPP
#define NONEXT_INFOGEO_HPP

// Information geometry on one-parameter families of density matrices:
// spectral curves with branch tracking and phase gauge, the classical and
// quantum metric coefficients (dedicated q = 1 forms and the generalized
// forms), and the symmetrized-divergence oracle used to cross-validate
// them.

#include "nonext/entropy.hpp"
#include "nonext/maxent.hpp"
#include "nonext/operator_core.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nonext {

/// Sampled one-parameter family on a uniform, strictly increasing grid.
struct StateCurve {
    std::vector<double> alphas;
    std::vector<DensityMatrix> states;
    std::optional<std::string> family;

    StateCurve(std::vector<double> a, std::vector<DensityMatrix> s,
               std::optional<std::string> fam = std::nullopt)
        : alphas(std::move(a)), states(std::move(s)), family(std::move(fam)) {
        if (alphas.size() < 3) throw ValidationError("StateCurve: need at least 3 grid points");
        if (alphas.size() != states.size()) {
            throw ValidationError("StateCurve: alphas and states length mismatch");
        }
        const double h = alphas[1] - alphas[0];
        if (!(h > 0.0)) throw ValidationError("StateCurve: grid must be strictly increasing");
        for (std::size_t i = 1; i < alphas.size(); ++i) {
            const double d = alphas[i] - alphas[i - 1];
            if (std::abs(d - h) > 1e-9 * std::max(1.0, std::abs(h))) {
                throw ValidationError("StateCurve: grid spacing not uniform at index " +
                                      std::to_string(i));
            }
        }
        const Eigen::Index dim = states.front().dim();
        for (const auto& st : states) {
            if (st.dim() != dim) throw ValidationError("StateCurve: mixed dimensions");
        }
    }

    double spacing() const { return alphas[1] - alphas[0]; }
    Eigen::Index dim() const { return states.front().dim(); }
    std::size_t size() const { return alphas.size(); }
};

/// Tracked spectral curve: per grid point, probabilities ordered by branch
/// (matched by maximal overlap with the previous point, not by magnitude)
/// and gauge-aligned orthonormal bases.
struct EigenCurve {
    std::vector<double> alphas;
    std::vector<Vector> probs;
    std::vector<Matrix> bases;
    std::vector<bool> degenerate;  // per grid point (transition into it)
    bool degeneracy_flag = false;

    double spacing() const { return alphas[1] - alphas[0]; }
    Eigen::Index dim() const { return probs.front().size(); }
    std::size_t size() const { return alphas.size(); }
};

class TrackingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMetricError : public std::runtime_error {
public:
    SingularMetricError(std::size_t point, Eigen::Index branch, double p)
        : std::runtime_error("singular metric at grid point " + std::to_string(point) +
                             ", branch " + std::to_string(branch) + " (p = " +
                             std::to_string(p) + ")"),
          point(point), branch(branch) {}
    std::size_t point;
    Eigen::Index branch;
};

/// Track eigenvalue branches along the curve by greedy maximal-overlap
/// assignment and align neighbor phases so every surviving overlap is real
/// and non-negative. Ambiguous assignments (two candidate overlaps within
/// 0.1) set the degeneracy flag; strict mode escalates them to an error.
inline EigenCurve build_eigencurve(const StateCurve& curve, bool strict = false) {
    EigenCurve ec;
    ec.alphas = curve.alphas;
    ec.probs.reserve(curve.size());
    ec.bases.reserve(curve.size());
    ec.degenerate.assign(curve.size(), false);

    {
        const auto& sd = curve.states.front().spectrum();
        ec.probs.push_back(sd.eigenvalues);
        ec.bases.push_back(sd.eigenvectors);
    }

    const Eigen::Index n = curve.dim();
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const auto& sd = curve.states[i].spectrum();
        const Matrix& prev = ec.bases.back();
        const Eigen::MatrixXd overlap2 = (prev.adjoint() * sd.eigenvectors).cwiseAbs2();

        // Greedy assignment branch <- column, largest overlap first.
        std::vector<Eigen::Index> perm(n, -1);
        std::vector<bool> row_done(n, false), col_done(n, false);
        bool ambiguous = false;
        for (Eigen::Index step = 0; step < n; ++step) {
            double best = -1.0;
            Eigen::Index ba = -1, bb = -1;
            for (Eigen::Index a = 0; a < n; ++a) {
                if (row_done[a]) continue;
                for (Eigen::Index b = 0; b < n; ++b) {
                    if (col_done[b]) continue;
                    const double v = overlap2(a, b);
                    if (v > best) {
                        best = v;
                        ba = a;
                        bb = b;
                    }
                }
            }
            // A rival is a competing assignment for the same branch or the
            // same eigenvector; unrelated cells do not make the choice
            // ambiguous.
            double second = -1.0;
            for (Eigen::Index a = 0; a < n; ++a) {
                if (row_done[a] || a == ba) continue;
                second = std::max(second, overlap2(a, bb));
            }
            for (Eigen::Index b = 0; b < n; ++b) {
                if (col_done[b] || b == bb) continue;
                second = std::max(second, overlap2(ba, b));
            }
            if (second >= 0.0 && best - second < 0.1) ambiguous = true;
            perm[ba] = bb;
            row_done[ba] = true;
            col_done[bb] = true;
        }

        Vector p(n);
        Matrix basis(sd.eigenvectors.rows(), n);
        bool weak = false;
        for (Eigen::Index a = 0; a < n; ++a) {
            p(a) = sd.eigenvalues(perm[a]);
            Eigen::VectorXcd col = sd.eigenvectors.col(perm[a]);
            const Complex z = prev.col(a).adjoint() * col;
            const double az = std::abs(z);
            if (az > 1e-12) col *= std::conj(z) / az;
            if (az <= 0.9) weak = true;
            basis.col(a) = col;
        }
        if (ambiguous || weak) {
            ec.degenerate[i] = true;
            ec.degeneracy_flag = true;
            if (strict) {
                throw TrackingError("build_eigencurve: ambiguous branch tracking at grid "
                                    "point " + std::to_string(i));
            }
        }
        const double psum = p.sum();
        if (std::abs(psum - 1.0) > 1e-10) {
            throw ValidationError("build_eigencurve: probabilities sum to " +
                                  std::to_string(psum) + " at grid point " + std::to_string(i));
        }
        ec.probs.push_back(std::move(p));
        ec.bases.push_back(std::move(basis));
    }
    return ec;
}

namespace detail {

inline void require_interior(const EigenCurve& ec, std::size_t i) {
    if (i == 0 || i + 1 >= ec.size()) {
        throw std::out_of_range("metric evaluation needs an interior grid point");
    }
}

/// Ln_q(1/p) with the boundary limits: finite 1/(1-q) for q < 1, infinite
/// for q >= 1.
inline double ln_q_inv(double p, const EntropicIndex& q) {
    if (p <= kSupportTol) {
        return q.value() < 1.0 && !q.near_one() ? 1.0 / (1.0 - q.value())
                                                : kInfiniteDivergence;
    }
    return ln_q(1.0 / p, q);
}

}  // namespace detail

inline constexpr double kClassicalMetricFloor = 1e-12;

/// Fisher coefficient sum_a (d p_a)^2 / p_a, the dedicated q = 1 form.
inline double classical_metric_q1(const EigenCurve& ec, std::size_t i) {
    detail::require_interior(ec, i);
    const double h = ec.spacing();
    double g = 0.0;
    for (Eigen::Index a = 0; a < ec.dim(); ++a) {
        const double p = ec.probs[i](a);
        if (p < kClassicalMetricFloor) throw SingularMetricError(i, a, p);
        const double dp = (ec.probs[i + 1](a) - ec.probs[i - 1](a)) / (2.0 * h);
        g += dp * dp / p;
    }
    return g;
}

/// Generalized classical coefficient q sum_a (d p_a)^2 / p_a / sum_a p_a^q.
inline double classical_metric(const EigenCurve& ec, std::size_t i, const EntropicIndex& q) {
    detail::require_interior(ec, i);
    const double h = ec.spacing();
    double g = 0.0, c = 0.0;
    for (Eigen::Index a = 0; a < ec.dim(); ++a) {
        const double p = ec.probs[i](a);
        if (p < kClassicalMetricFloor) throw SingularMetricError(i, a, p);
        const double dp = (ec.probs[i + 1](a) - ec.probs[i - 1](a)) / (2.0 * h);
        g += dp * dp / p;
        c += std::pow(p, q.value());
    }
    return q.value() * g / c;
}

/// Escort-expectation route to the same coefficient:
/// 4q << (d Ln_q p^{-1/2})^2 >>_q with the branch derivative taken through
/// the chain rule on the tracked probabilities.
inline double classical_metric_escort_form(const EigenCurve& ec, std::size_t i,
                                           const EntropicIndex& q) {
    detail::require_interior(ec, i);
    const double h = ec.spacing();
    double num = 0.0, den = 0.0;
    for (Eigen::Index a = 0; a < ec.dim(); ++a) {
        const double p = ec.probs[i](a);
        if (p < kClassicalMetricFloor) throw SingularMetricError(i, a, p);
        const double dp = (ec.probs[i + 1](a) - ec.probs[i - 1](a)) / (2.0 * h);
        const double dln = -0.5 * std::pow(p, -0.5 * (1.0 + q.value())) * dp;
        const double w = std::pow(p, q.value());
        num += w * dln * dln;
        den += w;
    }
    return 4.0 * q.value() * num / den;
}

/// Dedicated q = 1 quantum coefficient
/// 2 sum_{a,a'} |<a'|d a>|^2 p_a [ln p_a - ln p_a'].
inline double quantum_metric_q1(const EigenCurve& ec, std::size_t i) {
    detail::require_interior(ec, i);
    const double h = ec.spacing();
    const Eigen::Index n = ec.dim();
    const Matrix dbasis = (ec.bases[i + 1] - ec.bases[i - 1]) / (2.0 * h);
    const Matrix ov = ec.bases[i].adjoint() * dbasis;  // ov(a', a) = <a'|d a>
    double g = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
        const double pa = ec.probs[i](a);
        if (pa <= kSupportTol) continue;
        for (Eigen::Index ap = 0; ap < n; ++ap) {
            if (ap == a) continue;
            const double pap = ec.probs[i](ap);
            if (std::abs(pa - pap) < 1e-14) continue;
            if (pap <= kSupportTol) return kInfiniteDivergence;
            g += std::norm(ov(ap, a)) * pa * (std::log(pa) - std::log(pap));
        }
    }
    return 2.0 * g;
}

/// Generalized quantum coefficient, Tsallis-weighted basis-rotation term.
/// Equal-probability pairs contribute zero, so degenerate-cluster basis
/// ambiguity cannot change the value.
inline double quantum_metric(const EigenCurve& ec, std::size_t i, const EntropicIndex& q) {
    detail::require_interior(ec, i);
    const double h = ec.spacing();
    const Eigen::Index n = ec.dim();
    const Matrix dbasis = (ec.bases[i + 1] - ec.bases[i - 1]) / (2.0 * h);
    const Matrix ov = ec.bases[i].adjoint() * dbasis;
    double g = 0.0, c = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
        const double pa = ec.probs[i](a);
        if (pa > 0.0) c += std::pow(pa, q.value());
        if (pa <= kSupportTol) continue;
        const double lqa = detail::ln_q_inv(pa, q);
        for (Eigen::Index ap = 0; ap < n; ++ap) {
            if (ap == a) continue;
            const double pap = ec.probs[i](ap);
            if (std::abs(pa - pap) < 1e-14) continue;
            const double lqap = detail::ln_q_inv(pap, q);
            if (std::isinf(lqap)) return kInfiniteDivergence;
            g += std::norm(ov(ap, a)) * std::pow(pa, q.value()) * (lqap - lqa);
        }
    }
    return 2.0 * g / c;
}

/// Symmetrized-divergence oracle: the metric coefficient recovered from
/// [K_q(rho_{i+1}, rho_i) + K_q(rho_i, rho_{i+1})] / h^2 averaged over the
/// two neighboring steps, optionally Richardson-extrapolated against the
/// double-step estimate.
inline double metric_from_divergence(const StateCurve& curve, std::size_t i,
                                     const EntropicIndex& q, bool richardson = false) {
    if (i == 0 || i + 1 >= curve.size()) {
        throw std::out_of_range("metric_from_divergence needs an interior grid point");
    }
    const double h = curve.spacing();
    const auto sym = [&](std::size_t j, std::size_t k) {
        return q_kl_divergence(curve.states[j], curve.states[k], q) +
               q_kl_divergence(curve.states[k], curve.states[j], q);
    };
    const double g_h = (sym(i - 1, i) + sym(i, i + 1)) / (2.0 * h * h);
    if (!richardson) return g_h;
    const double g_2h = sym(i - 1, i + 1) / (4.0 * h * h);
    return (4.0 * g_h - g_2h) / 3.0;
}

/// Per-point metric report: coefficients, the divergence oracle, and the
/// conditioning flags.
struct MetricSample {
    double alpha = 0.0;
    double q = 1.0;
    double g_cl = 0.0;
    double g_qu = 0.0;
    double g_total = 0.0;
    double oracle = 0.0;
    double deviation = 0.0;
    bool degenerate = false;
    std::string error;  // empty on success
};

inline std::vector<MetricSample> metric_profile(const StateCurve& curve,
                                                const EntropicIndex& q,
                                                bool richardson = false,
                                                bool strict = false) {
    const EigenCurve ec = build_eigencurve(curve, strict);
    std::vector<MetricSample> out;
    out.reserve(curve.size() - 2);
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
        MetricSample s;
        s.alpha = curve.alphas[i];
        s.q = q.value();
        s.degenerate = ec.degenerate[i - 1] || ec.degenerate[i] || ec.degenerate[i + 1];
        try {
            s.g_cl = classical_metric(ec, i, q);
            s.g_qu = quantum_metric(ec, i, q);
            s.g_total = s.g_cl + s.g_qu;
            s.oracle = metric_from_divergence(curve, i, q, richardson);
            s.deviation = std::abs(s.g_total - s.oracle);
        } catch (const SingularMetricError& e) {
            s.error = e.what();
        }
        out.push_back(std::move(s));
    }
    return out;
}

// Built-in families; each isolates one term of the metric.

inline std::vector<double> uniform_grid(double a0, double a1, std::size_t n) {
    if (n < 3 || !(a1 > a0)) throw ValidationError("uniform_grid: need n >= 3 and a1 > a0");
    std::vector<double> g(n);
    const double h = (a1 - a0) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = a0 + h * static_cast<double>(i);
    return g;
}

inline StateCurve constant_curve(const DensityMatrix& rho, double a0, double a1,
                                 std::size_t n) {
    auto grid = uniform_grid(a0, a1, n);
    std::vector<DensityMatrix> states(grid.size(), rho);
    return StateCurve(std::move(grid), std::move(states), "constant");
}

/// diag(alpha, 1 - alpha); purely classical.
inline StateCurve binary_diagonal_curve(double a0, double a1, std::size_t n) {
    auto grid = uniform_grid(a0, a1, n);
    if (!(a0 > 0.0 && a1 < 1.0)) {
        throw ValidationError("binary_diagonal_curve: range must lie inside (0, 1)");
    }
    std::vector<DensityMatrix> states;
    states.reserve(grid.size());
    for (double a : grid) states.push_back(DensityMatrix::diagonal({a, 1.0 - a}));
    return StateCurve(std::move(grid), std::move(states), "binary_diagonal");
}

/// (1/2)(I + r (sigma_z cos a + sigma_x sin a)); constant spectrum, rotating
/// basis, purely quantum.
inline StateCurve rotating_qubit_curve(double r, double a0, double a1, std::size_t n) {
    if (!(r >= 0.0 && r < 1.0)) {
        throw ValidationError("rotating_qubit_curve: purity r must lie in [0, 1)");
    }
    auto grid = uniform_grid(a0, a1, n);
    std::vector<DensityMatrix> states;
    states.reserve(grid.size());
    for (double a : grid) {
        Matrix m(2, 2);
        m << 0.5 * (1.0 + r * std::cos(a)), 0.5 * r * std::sin(a),
             0.5 * r * std::sin(a), 0.5 * (1.0 - r * std::cos(a));
        states.emplace_back(HermitianOperator(std::move(m)));
    }
    return StateCurve(std::move(grid), std::move(states), "rotating_qubit");
}

/// Gibbs states of a fixed Hamiltonian with alpha as inverse temperature;
/// commuting family, classical term only.
inline StateCurve thermal_curve(const HermitianOperator& H, double a0, double a1,
                                std::size_t n) {
    auto grid = uniform_grid(a0, a1, n);
    std::vector<DensityMatrix> states;
    states.reserve(grid.size());
    for (double a : grid) states.push_back(gibbs_state(H, a).rho);
    return StateCurve(std::move(grid), std::move(states), "thermal");
}

}  // namespace nonext

#endif  // NONEXT_INFOGEO_HPP
