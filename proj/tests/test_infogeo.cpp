#include "nonext/infogeo.hpp"

#include "testutil.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace nonext;
using Catch::Matchers::WithinAbs;

namespace {

StateCurve transformed_by_diagonal_unitary(const StateCurve& curve) {
    const Eigen::Index n = curve.dim();
    Eigen::VectorXcd phases(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        phases(i) = std::polar(1.0, 0.7 + 1.3 * static_cast<double>(i));
    }
    const Matrix u = phases.asDiagonal();
    std::vector<DensityMatrix> states;
    states.reserve(curve.size());
    for (const auto& st : curve.states) {
        Matrix m = u * st.mat() * u.adjoint();
        states.emplace_back(HermitianOperator(std::move(m)));
    }
    return StateCurve(curve.alphas, std::move(states));
}

}  // namespace

TEST_CASE("state curve validation") {
    const auto rho = DensityMatrix::maximally_mixed(2);
    CHECK_THROWS_AS(StateCurve({0.0, 1.0}, {rho, rho}), ValidationError);
    CHECK_THROWS_AS(StateCurve({0.0, 0.1, 0.3}, {rho, rho, rho}), ValidationError);
    CHECK_THROWS_AS(StateCurve({0.0, 0.1, 0.2}, {rho, rho, DensityMatrix::maximally_mixed(3)}),
                    ValidationError);
    CHECK_NOTHROW(StateCurve({0.0, 0.1, 0.2}, {rho, rho, rho}));
}

TEST_CASE("eigencurve tracking") {
    SECTION("constant curve has unit overlaps and constant branches") {
        testutil::Rng rng(81);
        const auto rho = testutil::random_density(rng, 3);
        const auto ec = build_eigencurve(constant_curve(rho, 0.0, 1.0, 11));
        CHECK_FALSE(ec.degeneracy_flag);
        for (std::size_t i = 1; i < ec.size(); ++i) {
            CHECK((ec.probs[i] - ec.probs[0]).cwiseAbs().maxCoeff() < 1e-12);
            const Matrix ov = ec.bases[i - 1].adjoint() * ec.bases[i];
            CHECK(max_abs(ov - Matrix::Identity(3, 3)) < 1e-10);
        }
    }
    SECTION("binary diagonal branches follow the analytic family through the crossing") {
        const auto ec = build_eigencurve(binary_diagonal_curve(0.2, 0.8, 61));
        // Tracked branches are alpha and 1-alpha; the sorted order swaps at
        // alpha = 0.5 but the tracking must not.
        for (std::size_t i = 0; i < ec.size(); ++i) {
            const double a = ec.alphas[i];
            const double p0 = ec.probs[i](0);
            const double p1 = ec.probs[i](1);
            CHECK_THAT(std::min(p0, p1), WithinAbs(std::min(a, 1.0 - a), 1e-12));
            CHECK_THAT(std::max(p0, p1), WithinAbs(std::max(a, 1.0 - a), 1e-12));
            CHECK_THAT(p0 + p1, WithinAbs(1.0, 1e-12));
        }
        const bool branch0_is_alpha = std::abs(ec.probs[0](0) - 0.2) < 1e-12;
        for (std::size_t i = 0; i < ec.size(); ++i) {
            const double expected = branch0_is_alpha ? ec.alphas[i] : 1.0 - ec.alphas[i];
            CHECK_THAT(ec.probs[i](0), WithinAbs(expected, 1e-12));
        }
    }
    SECTION("rotating qubit has constant probabilities and rotating bases") {
        const auto ec = build_eigencurve(rotating_qubit_curve(0.5, 0.0, 1.0, 21));
        for (std::size_t i = 0; i < ec.size(); ++i) {
            CHECK_THAT(ec.probs[i].minCoeff(), WithinAbs(0.25, 1e-12));
            CHECK_THAT(ec.probs[i].maxCoeff(), WithinAbs(0.75, 1e-12));
        }
        // Gauge: neighbor overlaps real and non-negative.
        for (std::size_t i = 1; i < ec.size(); ++i) {
            for (Eigen::Index a = 0; a < 2; ++a) {
                const Complex ov = ec.bases[i - 1].col(a).adjoint() * ec.bases[i].col(a);
                CHECK(std::abs(ov.imag()) < 1e-10);
                CHECK(ov.real() >= 0.0);
            }
        }
    }
    SECTION("coarse sampling of a fast rotation is flagged, strict mode throws") {
        // Step pi/2: neighbor overlaps split 50/50 between the branches.
        const auto curve = rotating_qubit_curve(0.5, 0.0, 1.5 * 3.14159265358979, 4);
        const auto ec = build_eigencurve(curve);
        CHECK(ec.degeneracy_flag);
        CHECK_THROWS_AS(build_eigencurve(curve, true), TrackingError);
    }
}

TEST_CASE("classical metric") {
    SECTION("constant curve gives zero") {
        const auto ec = build_eigencurve(
            constant_curve(DensityMatrix::diagonal({0.3, 0.7}), 0.0, 1.0, 5));
        CHECK_THAT(classical_metric(ec, 2, EntropicIndex(1.0)), WithinAbs(0.0, 1e-14));
        CHECK_THAT(classical_metric_q1(ec, 2), WithinAbs(0.0, 1e-14));
    }
    SECTION("binary diagonal Fisher value at the midpoint") {
        const auto ec = build_eigencurve(binary_diagonal_curve(0.4, 0.6, 21));
        const std::size_t mid = 10;  // alpha = 0.5
        CHECK_THAT(classical_metric_q1(ec, mid), WithinAbs(4.0, 1e-10));
        CHECK_THAT(classical_metric(ec, mid, EntropicIndex(1.0)), WithinAbs(4.0, 1e-10));
        CHECK_THAT(classical_metric(ec, mid, EntropicIndex(0.5)),
                   WithinAbs(0.5 * 4.0 / std::sqrt(2.0), 1e-10));
    }
    SECTION("profile matches the closed form 1/(alpha(1-alpha))") {
        const auto curve = binary_diagonal_curve(0.2, 0.8, 601);  // h = 1e-3
        const auto ec = build_eigencurve(curve);
        for (std::size_t i = 1; i + 1 < curve.size(); i += 40) {
            const double a = curve.alphas[i];
            const double expected = 1.0 / (a * (1.0 - a));
            const double got = classical_metric_q1(ec, i);
            CHECK(std::abs(got - expected) / expected < 1e-4);
        }
    }
    SECTION("escort-expectation form agrees") {
        const auto ec = build_eigencurve(binary_diagonal_curve(0.3, 0.7, 41));
        for (double q : {0.3, 0.8, 1.7}) {
            for (std::size_t i : {std::size_t{5}, std::size_t{20}, std::size_t{35}}) {
                CHECK(std::abs(classical_metric(ec, i, EntropicIndex(q)) -
                               classical_metric_escort_form(ec, i, EntropicIndex(q))) < 1e-10);
            }
        }
    }
    SECTION("vanishing probability raises a singular-metric error") {
        std::vector<DensityMatrix> states;
        for (int i = 0; i < 3; ++i) states.push_back(DensityMatrix::diagonal({1e-13, 1.0 - 1e-13}));
        const StateCurve curve({0.0, 0.1, 0.2}, std::move(states));
        const auto ec = build_eigencurve(curve);
        CHECK_THROWS_AS(classical_metric(ec, 1, EntropicIndex(1.0)), SingularMetricError);
    }
    SECTION("boundary points are rejected") {
        const auto ec = build_eigencurve(binary_diagonal_curve(0.4, 0.6, 5));
        CHECK_THROWS_AS(classical_metric(ec, 0, EntropicIndex(1.0)), std::out_of_range);
        CHECK_THROWS_AS(classical_metric(ec, 4, EntropicIndex(1.0)), std::out_of_range);
    }
}

TEST_CASE("quantum metric") {
    SECTION("commuting family gives zero") {
        const auto ec = build_eigencurve(binary_diagonal_curve(0.3, 0.7, 21));
        CHECK_THAT(quantum_metric(ec, 10, EntropicIndex(1.0)), WithinAbs(0.0, 1e-12));
        CHECK_THAT(quantum_metric_q1(ec, 10), WithinAbs(0.0, 1e-12));
    }
    SECTION("rotating qubit closed form at q = 1") {
        const double r = 0.5;
        const auto curve = rotating_qubit_curve(r, 0.0, 0.1, 101);  // h = 1e-3
        const auto ec = build_eigencurve(curve);
        const double expected = 0.25 * std::log(3.0);
        for (std::size_t i : {std::size_t{1}, std::size_t{50}, std::size_t{99}}) {
            CHECK_THAT(quantum_metric_q1(ec, i), WithinAbs(expected, 1e-4));
            CHECK_THAT(quantum_metric(ec, i, EntropicIndex(1.0)), WithinAbs(expected, 1e-4));
        }
    }
    SECTION("rotating qubit at q = 0.5 matches the divergence oracle") {
        const auto curve = rotating_qubit_curve(0.5, 0.0, 0.1, 101);
        const auto ec = build_eigencurve(curve);
        const EntropicIndex q(0.5);
        const double direct = classical_metric(ec, 50, q) + quantum_metric(ec, 50, q);
        const double oracle = metric_from_divergence(curve, 50, q);
        CHECK(std::abs(direct - oracle) < 1e-4);
    }
    SECTION("non-negative across families and q") {
        testutil::Rng rng(83);
        const auto thermal =
            thermal_curve(testutil::random_hermitian(rng, 3), 0.5, 1.5, 41);
        const auto rotating = rotating_qubit_curve(0.7, 0.0, 1.0, 41);
        for (const auto* curve : {&thermal, &rotating}) {
            const auto ec = build_eigencurve(*curve);
            for (double q : {0.3, 0.7, 1.0, 1.5}) {
                for (std::size_t i = 1; i + 1 < curve->size(); ++i) {
                    CHECK(quantum_metric(ec, i, EntropicIndex(q)) >= -1e-10);
                }
            }
        }
    }
}

TEST_CASE("divergence oracle") {
    SECTION("constant curve gives zero") {
        const auto curve = constant_curve(DensityMatrix::diagonal({0.3, 0.7}), 0.0, 1.0, 5);
        CHECK_THAT(metric_from_divergence(curve, 2, EntropicIndex(1.0)), WithinAbs(0.0, 1e-12));
    }
    SECTION("binary diagonal Fisher value") {
        const auto curve = binary_diagonal_curve(0.499, 0.501, 3);  // h = 1e-3, mid = 0.5
        CHECK_THAT(metric_from_divergence(curve, 1, EntropicIndex(1.0)), WithinAbs(4.0, 1e-4));
    }
    SECTION("rotating qubit value both code paths") {
        const auto curve = rotating_qubit_curve(0.5, 0.0, 0.002, 3);  // h = 1e-3
        CHECK_THAT(metric_from_divergence(curve, 1, EntropicIndex(1.0)),
                   WithinAbs(0.25 * std::log(3.0), 1e-4));
    }
    SECTION("Richardson extrapolation sharpens the estimate") {
        const auto curve = binary_diagonal_curve(0.46, 0.54, 9);  // h = 0.01
        const double plain = metric_from_divergence(curve, 4, EntropicIndex(1.0));
        const double rich = metric_from_divergence(curve, 4, EntropicIndex(1.0), true);
        CHECK(std::abs(rich - 4.0) <= std::abs(plain - 4.0));
    }
}

TEST_CASE("metric profile") {
    SECTION("constant curve is all zeros") {
        testutil::Rng rng(89);
        const auto profile = metric_profile(
            constant_curve(testutil::random_density(rng, 3), 0.0, 1.0, 7), EntropicIndex(0.7));
        CHECK(profile.size() == 5);
        for (const auto& s : profile) {
            CHECK(s.error.empty());
            CHECK(std::abs(s.g_total) < 1e-10);
            CHECK(std::abs(s.oracle) < 1e-10);
        }
    }
    SECTION("deviation shrinks as O(h^2)") {
        // The rotating qubit is unusable here: its direct metric and the
        // divergence oracle agree to rounding at any step, so a family with
        // varying spectrum carries the h^2 error term instead.
        const EntropicIndex q(1.0);
        std::vector<double> devs;
        for (std::size_t n : {std::size_t{11}, std::size_t{21}, std::size_t{41}}) {
            const auto curve = binary_diagonal_curve(0.3, 0.7, n);
            const auto ec = build_eigencurve(curve);
            const std::size_t mid = (n - 1) / 2;
            const double direct = classical_metric(ec, mid, q) + quantum_metric(ec, mid, q);
            const double oracle = metric_from_divergence(curve, mid, q);
            devs.push_back(std::abs(direct - oracle));
        }
        // Halving h divides the deviation by about 4.
        CHECK(devs[1] < devs[0] / 2.5);
        CHECK(devs[2] < devs[1] / 2.5);
    }
    SECTION("gauge independence under a fixed diagonal unitary") {
        const auto curve = rotating_qubit_curve(0.5, 0.0, 0.5, 21);
        const auto rotated = transformed_by_diagonal_unitary(curve);
        const EntropicIndex q(0.7);
        const auto ec_a = build_eigencurve(curve);
        const auto ec_b = build_eigencurve(rotated);
        for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
            CHECK(std::abs(classical_metric(ec_a, i, q) - classical_metric(ec_b, i, q)) < 1e-10);
            CHECK(std::abs(quantum_metric(ec_a, i, q) - quantum_metric(ec_b, i, q)) < 1e-10);
        }
    }
    SECTION("form invariance at q = 1 on all families") {
        testutil::Rng rng(97);
        const std::vector<StateCurve> curves = {
            binary_diagonal_curve(0.2, 0.8, 31),
            rotating_qubit_curve(0.5, 0.0, 1.0, 31),
            thermal_curve(testutil::random_hermitian(rng, 3), 0.5, 1.5, 31),
        };
        const EntropicIndex q1(1.0);
        for (const auto& curve : curves) {
            const auto ec = build_eigencurve(curve);
            for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
                CHECK(std::abs(classical_metric(ec, i, q1) - classical_metric_q1(ec, i)) <
                      1e-10);
                CHECK(std::abs(quantum_metric(ec, i, q1) - quantum_metric_q1(ec, i)) < 1e-10);
            }
        }
    }
}
