#ifndef NONEXT_IO_HPP
#define NONEXT_IO_HPP

// JSON file formats shared with the CLI: dense complex matrices as
// {"dim": n, "re": [[...]], "im": [[...]]} (im optional) and state curves
// as either explicit state lists or built-in family descriptions. Floats
// are serialized with 17 significant digits so round trips are exact.

#include "nonext/infogeo.hpp"
#include "nonext/operator_core.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace nonext::io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Trace deviations up to this are renormalized away with a warning when
/// loading states from files; larger deviations are rejected.
inline constexpr double kTraceClampTol = 1e-5;

inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Infinity has no JSON literal; it is serialized as a tagged object.
inline ordered_json json_number(double v) {
    if (std::isinf(v) || std::isnan(v)) {
        return ordered_json{{"non_finite", format_double(v)}};
    }
    return ordered_json(v);
}

inline Matrix parse_matrix(const json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("re")) {
        throw ValidationError("matrix object must contain \"dim\" and \"re\"");
    }
    const auto n = j.at("dim").get<Eigen::Index>();
    if (n < 1) throw ValidationError("matrix dim must be >= 1");
    const json& re = j.at("re");
    const json* im = j.contains("im") ? &j.at("im") : nullptr;
    const auto check_shape = [n](const json& rows, const char* name) {
        if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n) {
            throw ValidationError(std::string(name) + " must be a " + std::to_string(n) +
                                  "-row array");
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!rows[i].is_array() || static_cast<Eigen::Index>(rows[i].size()) != n) {
                throw ValidationError(std::string(name) + " row " + std::to_string(i) +
                                      " must have " + std::to_string(n) + " entries");
            }
        }
    };
    check_shape(re, "\"re\"");
    if (im) check_shape(*im, "\"im\"");
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const json& rij = re[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            if (!rij.is_number()) {
                throw ValidationError("\"re\" element (" + std::to_string(i) + "," +
                                      std::to_string(k) + ") is not a number");
            }
            double imv = 0.0;
            if (im) {
                const json& iij = (*im)[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
                if (!iij.is_number()) {
                    throw ValidationError("\"im\" element (" + std::to_string(i) + "," +
                                          std::to_string(k) + ") is not a number");
                }
                imv = iij.get<double>();
            }
            m(i, k) = Complex(rij.get<double>(), imv);
        }
    }
    return m;
}

inline ordered_json matrix_to_json(const Matrix& m) {
    ordered_json re = ordered_json::array();
    ordered_json im = ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        ordered_json rrow = ordered_json::array();
        ordered_json irow = ordered_json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            rrow.push_back(m(i, k).real());
            irow.push_back(m(i, k).imag());
        }
        re.push_back(std::move(rrow));
        im.push_back(std::move(irow));
    }
    return ordered_json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("JSON parse error in " + path + ": " + e.what());
    }
    return j;
}

inline HermitianOperator load_operator(const std::string& path) {
    return HermitianOperator(parse_matrix(load_json_file(path)));
}

/// Load a density matrix; trace deviations within the clamp tolerance are
/// renormalized and reported through `warnings`.
inline DensityMatrix load_state(const std::string& path, std::vector<std::string>* warnings) {
    Matrix m = parse_matrix(load_json_file(path));
    HermitianOperator op(std::move(m));
    const double tr = trace(op);
    if (std::abs(tr - 1.0) > kTraceTol) {
        if (std::abs(tr - 1.0) > kTraceClampTol) {
            throw ValidationError("state trace deviates from 1 by " +
                                  format_double(tr - 1.0) + " in " + path);
        }
        if (warnings) {
            warnings->push_back("state renormalized: trace deviated from 1 by " +
                                format_double(tr - 1.0));
        }
        op = HermitianOperator(Matrix(op.mat() / tr));
    }
    return DensityMatrix(std::move(op));
}

/// Curve file: either {"alphas": [...], "states": [matrix, ...]} or a
/// family description such as
/// {"family": "rotating_qubit", "r": 0.5, "alpha_min": a, "alpha_max": b, "n": m}.
inline StateCurve load_curve(const json& j, std::vector<std::string>* warnings) {
    if (j.contains("family")) {
        const std::string fam = j.at("family").get<std::string>();
        const double a0 = j.at("alpha_min").get<double>();
        const double a1 = j.at("alpha_max").get<double>();
        const auto n = j.at("n").get<std::size_t>();
        if (fam == "rotating_qubit") {
            return rotating_qubit_curve(j.at("r").get<double>(), a0, a1, n);
        }
        if (fam == "binary_diagonal") return binary_diagonal_curve(a0, a1, n);
        if (fam == "constant") {
            DensityMatrix rho(HermitianOperator(parse_matrix(j.at("state"))));
            return constant_curve(rho, a0, a1, n);
        }
        if (fam == "thermal") {
            HermitianOperator H(parse_matrix(j.at("H")));
            return thermal_curve(H, a0, a1, n);
        }
        throw ValidationError("unknown curve family: " + fam);
    }
    if (!j.contains("alphas") || !j.contains("states")) {
        throw ValidationError("curve object must contain \"alphas\"+\"states\" or \"family\"");
    }
    std::vector<double> alphas = j.at("alphas").get<std::vector<double>>();
    std::vector<DensityMatrix> states;
    states.reserve(j.at("states").size());
    for (std::size_t i = 0; i < j.at("states").size(); ++i) {
        Matrix m = parse_matrix(j.at("states")[i]);
        HermitianOperator op(std::move(m));
        const double tr = trace(op);
        if (std::abs(tr - 1.0) > kTraceTol) {
            if (std::abs(tr - 1.0) > kTraceClampTol) {
                throw ValidationError("curve state " + std::to_string(i) +
                                      " trace deviates from 1 by " + format_double(tr - 1.0));
            }
            if (warnings) {
                warnings->push_back("curve state " + std::to_string(i) +
                                    " renormalized: trace deviation " + format_double(tr - 1.0));
            }
            op = HermitianOperator(Matrix(op.mat() / tr));
        }
        states.emplace_back(std::move(op));
    }
    return StateCurve(std::move(alphas), std::move(states));
}

inline StateCurve load_curve_file(const std::string& path, std::vector<std::string>* warnings) {
    return load_curve(load_json_file(path), warnings);
}

}  // namespace nonext::io

#endif  // NONEXT_IO_HPP
