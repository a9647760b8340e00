#include "nonext/io.hpp"

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace nonext;
using nonext::io::json;

namespace {

json parse(const char* text) { return json::parse(text); }

}  // namespace

TEST_CASE("matrix parsing") {
    SECTION("real-only matrix, im defaulted") {
        const auto m = nonext::io::parse_matrix(
            parse(R"({"dim": 2, "re": [[0.5, 0], [0, 0.5]]})"));
        CHECK(m(0, 0) == Complex(0.5, 0.0));
        CHECK(m(1, 0) == Complex(0.0, 0.0));
    }
    SECTION("complex matrix") {
        const auto m = nonext::io::parse_matrix(parse(
            R"({"dim": 2, "re": [[1, 0], [0, 1]], "im": [[0, 0.25], [-0.25, 0]]})"));
        CHECK(m(0, 1) == Complex(0.0, 0.25));
        CHECK(m(1, 0) == Complex(0.0, -0.25));
    }
    SECTION("shape and element errors name the offender") {
        CHECK_THROWS_WITH(nonext::io::parse_matrix(parse(R"({"dim": 2, "re": [[1, 0]]})")),
                          Catch::Matchers::ContainsSubstring("2-row"));
        CHECK_THROWS_WITH(
            nonext::io::parse_matrix(parse(R"({"dim": 2, "re": [[1, "x"], [0, 1]]})")),
            Catch::Matchers::ContainsSubstring("(0,1)"));
        CHECK_THROWS_AS(nonext::io::parse_matrix(parse(R"({"re": [[1]]})")), ValidationError);
    }
    SECTION("round trip through matrix_to_json") {
        Matrix m(2, 2);
        m << Complex(0.1, 0.0), Complex(0.2, 0.3), Complex(0.2, -0.3), Complex(0.7, 0.0);
        const auto j = nonext::io::matrix_to_json(m);
        const Matrix back = nonext::io::parse_matrix(json::parse(j.dump()));
        CHECK(max_abs(m - back) == 0.0);
    }
}

TEST_CASE("float formatting round-trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789e12, 0.0}) {
        const std::string s = nonext::io::format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(nonext::io::format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("curve parsing") {
    SECTION("family description") {
        const auto curve = nonext::io::load_curve(
            parse(R"({"family": "rotating_qubit", "r": 0.5,
                      "alpha_min": 0.0, "alpha_max": 1.0, "n": 11})"),
            nullptr);
        CHECK(curve.size() == 11);
        CHECK(curve.dim() == 2);
        CHECK(curve.family == "rotating_qubit");
    }
    SECTION("explicit state list") {
        const auto curve = nonext::io::load_curve(parse(
            R"({"alphas": [0.0, 0.1, 0.2],
                "states": [{"dim": 2, "re": [[0.5, 0], [0, 0.5]]},
                           {"dim": 2, "re": [[0.5, 0], [0, 0.5]]},
                           {"dim": 2, "re": [[0.5, 0], [0, 0.5]]}]})"),
            nullptr);
        CHECK(curve.size() == 3);
    }
    SECTION("unknown family") {
        CHECK_THROWS_AS(nonext::io::load_curve(
                            parse(R"({"family": "nope", "alpha_min": 0, "alpha_max": 1, "n": 5})"),
                            nullptr),
                        ValidationError);
    }
}

TEST_CASE("state loading clamps small trace deviations") {
    const auto tmp = std::filesystem::temp_directory_path();

    const auto write = [&](const char* name, const std::string& text) {
        const auto path = tmp / name;
        std::ofstream out(path);
        out << text;
        return path.string();
    };

    std::vector<std::string> warnings;
    const auto ok = write("nonext_io_ok.json", R"({"dim": 2, "re": [[0.5, 0], [0, 0.499999]]})");
    const auto rho = nonext::io::load_state(ok, &warnings);
    CHECK(warnings.size() == 1);
    CHECK(std::abs(trace(rho.op()) - 1.0) < 1e-12);

    const auto bad = write("nonext_io_bad.json", R"({"dim": 2, "re": [[0.5, 0], [0, 0.4]]})");
    CHECK_THROWS_AS(nonext::io::load_state(bad, nullptr), ValidationError);
}
