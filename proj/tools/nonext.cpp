// Command-line surface: validate inputs, run entropy/divergence/
// equilibrium/metric computations and parameter scans, and emit
// deterministic JSON or CSV.
//
// Exit codes: 0 success (warnings allowed), 1 input/validation error,
// 2 numerical non-convergence.

#include "nonext/entropy.hpp"
#include "nonext/infogeo.hpp"
#include "nonext/io.hpp"
#include "nonext/maxent.hpp"
#include "nonext/operator_core.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace nonext;
using nonext::io::format_double;
using nonext::io::json_number;
using nonext::io::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNonConvergence = 2;

struct CommonOpts {
    std::string format = "json";
    double tol = 1e-10;
    int max_iter = 10000;
    double damping = 0.5;
    std::string init = "gibbs_q1";

    SolverConfig solver_config() const {
        SolverConfig cfg;
        cfg.tol = tol;
        cfg.max_iter = max_iter;
        cfg.damping = damping;
        if (init == "gibbs_q1") {
            cfg.init = SolverConfig::Init::gibbs_q1;
        } else if (init == "maximally_mixed") {
            cfg.init = SolverConfig::Init::maximally_mixed;
        } else {
            throw ValidationError("unknown init: " + init);
        }
        return cfg;
    }
};

std::size_t worker_count() {
    const char* env = std::getenv("NONEXT_THREADS");
    if (!env) return 0;
    const long n = std::strtol(env, nullptr, 10);
    return n > 1 ? static_cast<std::size_t>(n) : 0;
}

/// "a:b:n" -> n points linearly spaced over [a, b].
std::vector<double> parse_range(const std::string& spec) {
    double a = 0.0, b = 0.0;
    long n = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(spec);
    if (!(in >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':') {
        throw ValidationError("range must have the form a:b:n, got \"" + spec + "\"");
    }
    if (n < 1 || n > 10000) throw ValidationError("range length must lie in [1, 10000]");
    if (n == 1) {
        if (a != b) throw ValidationError("range of length 1 requires a == b");
        return {a};
    }
    if (!(b > a)) throw ValidationError("range must be strictly increasing");
    std::vector<double> out(static_cast<std::size_t>(n));
    const double h = (b - a) / static_cast<double>(n - 1);
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + h * static_cast<double>(i);
    return out;
}

ordered_json report_header(const std::string& command, const CommonOpts& opt) {
    return ordered_json{
        {"command", command},
        {"params", ordered_json{{"tol", opt.tol},
                                {"max_iter", opt.max_iter},
                                {"damping", opt.damping},
                                {"init", opt.init}}},
    };
}

void emit_json(const ordered_json& report) { std::cout << report.dump(2) << "\n"; }

void emit_csv_header(const std::string& command, const CommonOpts& opt,
                     const std::vector<std::string>& warnings,
                     const std::vector<std::string>& columns) {
    std::cout << "# command=" << command << " tol=" << format_double(opt.tol)
              << " max_iter=" << opt.max_iter << " damping=" << format_double(opt.damping)
              << " init=" << opt.init << "\n";
    for (const auto& w : warnings) std::cout << "# warning: " << w << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        std::cout << (i ? "," : "") << columns[i];
    }
    std::cout << "\n";
}

int cmd_validate(const std::string& path, const CommonOpts& opt) {
    const auto j = nonext::io::load_json_file(path);
    const Matrix m = nonext::io::parse_matrix(j);

    HermitianOperator op(m);  // throws with the offending element named
    double herm_dev = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k <= i; ++k) {
            herm_dev = std::max(herm_dev, std::abs(m(i, k) - std::conj(m(k, i))));
        }
    }
    const double tr = trace(op);
    const double trace_dev = std::abs(tr - 1.0);
    const auto sd = spectral_decompose(op);
    const double min_eig = sd.eigenvalues.minCoeff();

    std::vector<std::string> warnings;
    if (trace_dev > kTraceTol && trace_dev <= nonext::io::kTraceClampTol) {
        warnings.push_back("trace deviation " + format_double(tr - 1.0) +
                           " within clamp; state usable after renormalization");
    }
    if (trace_dev > nonext::io::kTraceClampTol) {
        throw ValidationError("trace deviates from 1 by " + format_double(tr - 1.0));
    }
    if (min_eig < -kEigenvalueClampTol) {
        throw ValidationError("negative eigenvalue " + format_double(min_eig));
    }

    if (opt.format == "csv") {
        emit_csv_header("validate", opt, warnings,
                        {"dim", "hermiticity_deviation", "trace_deviation", "min_eigenvalue"});
        std::cout << op.dim() << "," << format_double(herm_dev) << ","
                  << format_double(trace_dev) << "," << format_double(min_eig) << "\n";
    } else {
        ordered_json rep = report_header("validate", opt);
        rep["warnings"] = warnings;
        rep["result"] = ordered_json{{"dim", op.dim()},
                                     {"hermiticity_deviation", herm_dev},
                                     {"trace_deviation", trace_dev},
                                     {"min_eigenvalue", min_eig}};
        rep["status"] = "ok";
        emit_json(rep);
    }
    return kExitOk;
}

int cmd_entropy(const std::string& path, const std::vector<double>& qs,
                const CommonOpts& opt) {
    std::vector<std::string> warnings;
    const DensityMatrix rho = nonext::io::load_state(path, &warnings);
    ordered_json rows = ordered_json::array();
    for (double qv : qs) {
        const EntropicIndex q(qv);
        if (q.near_one()) warnings.push_back("q=" + format_double(qv) + ": near-one branch");
        rows.push_back(ordered_json{{"q", qv},
                                    {"S_q", tsallis_entropy_normalized(rho, q)},
                                    {"S_1", von_neumann_entropy(rho)}});
    }
    if (opt.format == "csv") {
        emit_csv_header("entropy", opt, warnings, {"q", "S_q", "S_1"});
        for (const auto& r : rows) {
            std::cout << format_double(r["q"].get<double>()) << ","
                      << format_double(r["S_q"].get<double>()) << ","
                      << format_double(r["S_1"].get<double>()) << "\n";
        }
    } else {
        ordered_json rep = report_header("entropy", opt);
        rep["warnings"] = warnings;
        rep["results"] = rows;
        rep["status"] = "ok";
        emit_json(rep);
    }
    return kExitOk;
}

int cmd_divergence(const std::string& path_a, const std::string& path_b, double qv,
                   const CommonOpts& opt) {
    std::vector<std::string> warnings;
    const DensityMatrix rho = nonext::io::load_state(path_a, &warnings);
    const DensityMatrix rho_p = nonext::io::load_state(path_b, &warnings);
    const EntropicIndex q(qv);
    if (q.near_one()) warnings.push_back("q=" + format_double(qv) + ": near-one branch");
    const double k_fwd = q_kl_divergence(rho, rho_p, q);
    const double k_rev = q_kl_divergence(rho_p, rho, q);
    const double sym = k_fwd + k_rev;
    if (opt.format == "csv") {
        emit_csv_header("divergence", opt, warnings, {"q", "K_forward", "K_reverse", "K_sym"});
        std::cout << format_double(qv) << "," << format_double(k_fwd) << ","
                  << format_double(k_rev) << "," << format_double(sym) << "\n";
    } else {
        ordered_json rep = report_header("divergence", opt);
        rep["warnings"] = warnings;
        rep["result"] = ordered_json{{"q", qv},
                                     {"K_forward", json_number(k_fwd)},
                                     {"K_reverse", json_number(k_rev)},
                                     {"K_sym", json_number(sym)}};
        rep["status"] = "ok";
        emit_json(rep);
    }
    return kExitOk;
}

ordered_json equilibrium_json(const EquilibriumState& eq) {
    const double identity_dev = std::abs(eq.c_q - std::pow(eq.Z_q, 1.0 - eq.q));
    return ordered_json{{"q", eq.q},
                        {"beta", eq.beta},
                        {"U_q", eq.U_q},
                        {"Z_q", eq.Z_q},
                        {"c_q", eq.c_q},
                        {"S_q", tsallis_entropy_normalized(eq.rho, EntropicIndex(eq.q))},
                        {"iterations", eq.iterations},
                        {"residual", eq.residual},
                        {"partition_identity_deviation", identity_dev},
                        {"rho", nonext::io::matrix_to_json(eq.rho.mat())}};
}

int cmd_equilibrium(const std::string& path, double beta, double qv, const CommonOpts& opt) {
    const HermitianOperator H = nonext::io::load_operator(path);
    const EntropicIndex q(qv);
    std::vector<std::string> warnings;
    if (q.near_one()) warnings.push_back("q near 1: Gibbs closed form used");
    const EquilibriumState eq = solve_equilibrium(H, beta, q, opt.solver_config());
    if (opt.format == "csv") {
        emit_csv_header("equilibrium", opt, warnings,
                        {"q", "beta", "U_q", "Z_q", "c_q", "S_q", "iterations", "residual"});
        const auto j = equilibrium_json(eq);
        std::cout << format_double(eq.q) << "," << format_double(eq.beta) << ","
                  << format_double(eq.U_q) << "," << format_double(eq.Z_q) << ","
                  << format_double(eq.c_q) << "," << format_double(j["S_q"].get<double>())
                  << "," << eq.iterations << "," << format_double(eq.residual) << "\n";
    } else {
        ordered_json rep = report_header("equilibrium", opt);
        rep["warnings"] = warnings;
        rep["result"] = equilibrium_json(eq);
        rep["status"] = "ok";
        emit_json(rep);
    }
    return kExitOk;
}

struct ScanCell {
    double q, beta;
    bool ok = false;
    double U_q = 0, Z_q = 0, c_q = 0, S_q = 0;
    int iterations = 0;
    std::string error;
};

int cmd_scan(const std::string& path, const std::vector<double>& qs,
             const std::vector<double>& betas, const CommonOpts& opt) {
    const HermitianOperator H = nonext::io::load_operator(path);
    const SolverConfig cfg = opt.solver_config();

    std::vector<std::pair<double, double>> grid;
    for (double qv : qs) {
        for (double b : betas) grid.emplace_back(qv, b);
    }
    std::vector<ScanCell> cells(grid.size());

    const auto run_cell = [&](std::size_t i) {
        ScanCell c;
        c.q = grid[i].first;
        c.beta = grid[i].second;
        try {
            const EntropicIndex q(c.q);
            const EquilibriumState eq = solve_equilibrium(H, c.beta, q, cfg);
            c.U_q = eq.U_q;
            c.Z_q = eq.Z_q;
            c.c_q = eq.c_q;
            c.S_q = tsallis_entropy_normalized(eq.rho, q);
            c.iterations = eq.iterations;
            c.ok = true;
        } catch (const std::exception& e) {
            c.error = e.what();
        }
        cells[i] = std::move(c);
    };

    // Cells are independent; output is assembled in grid order regardless
    // of execution order.
    const std::size_t workers = worker_count();
    if (workers > 1) {
        std::vector<std::future<void>> futs;
        for (std::size_t w = 0; w < workers; ++w) {
            futs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < grid.size(); i += workers) run_cell(i);
            }));
        }
        for (auto& f : futs) f.get();
    } else {
        for (std::size_t i = 0; i < grid.size(); ++i) run_cell(i);
    }

    const bool all_failed =
        !cells.empty() &&
        std::none_of(cells.begin(), cells.end(), [](const ScanCell& c) { return c.ok; });

    if (opt.format == "csv") {
        emit_csv_header("scan", opt, {},
                        {"q", "beta", "U_q", "Z_q", "c_q", "S_q", "iterations", "status"});
        for (const auto& c : cells) {
            std::cout << format_double(c.q) << "," << format_double(c.beta) << ",";
            if (c.ok) {
                std::cout << format_double(c.U_q) << "," << format_double(c.Z_q) << ","
                          << format_double(c.c_q) << "," << format_double(c.S_q) << ","
                          << c.iterations << ",ok\n";
            } else {
                std::cout << ",,,,,failed\n";
            }
        }
    } else {
        ordered_json rows = ordered_json::array();
        for (const auto& c : cells) {
            ordered_json r{{"q", c.q}, {"beta", c.beta}};
            if (c.ok) {
                r["U_q"] = c.U_q;
                r["Z_q"] = c.Z_q;
                r["c_q"] = c.c_q;
                r["S_q"] = c.S_q;
                r["iterations"] = c.iterations;
                r["status"] = "ok";
            } else {
                r["status"] = "failed";
                r["error"] = c.error;
            }
            rows.push_back(std::move(r));
        }
        ordered_json rep = report_header("scan", opt);
        rep["warnings"] = ordered_json::array();
        rep["results"] = rows;
        rep["status"] = all_failed ? "failed" : "ok";
        emit_json(rep);
    }
    return all_failed ? kExitNonConvergence : kExitOk;
}

int cmd_metric(const std::string& path, double qv, std::optional<double> h, bool richardson,
               bool strict, const CommonOpts& opt) {
    std::vector<std::string> warnings;
    auto j = nonext::io::load_json_file(path);
    if (h) {
        if (!j.contains("family")) {
            throw ValidationError("--h can only regrid family curve files");
        }
        const double a0 = j.at("alpha_min").get<double>();
        const double a1 = j.at("alpha_max").get<double>();
        const auto n = static_cast<std::size_t>(std::lround((a1 - a0) / *h)) + 1;
        j["n"] = n;
    }
    const StateCurve curve = nonext::io::load_curve(j, &warnings);
    const EntropicIndex q(qv);
    const auto profile = metric_profile(curve, q, richardson, strict);

    for (const auto& s : profile) {
        if (s.degenerate) {
            warnings.push_back("degenerate branch tracking near alpha=" +
                               format_double(s.alpha));
            break;
        }
    }

    if (opt.format == "csv") {
        emit_csv_header("metric", opt, warnings,
                        {"alpha", "g_cl", "g_qu", "g_total", "oracle", "deviation", "flags"});
        for (const auto& s : profile) {
            std::string flags;
            if (s.degenerate) flags += "degenerate";
            if (!s.error.empty()) flags += (flags.empty() ? "" : ";") + std::string("singular");
            std::cout << format_double(s.alpha) << ",";
            if (s.error.empty()) {
                std::cout << format_double(s.g_cl) << "," << format_double(s.g_qu) << ","
                          << format_double(s.g_total) << "," << format_double(s.oracle) << ","
                          << format_double(s.deviation);
            } else {
                std::cout << ",,,,";
            }
            std::cout << "," << flags << "\n";
        }
    } else {
        ordered_json rows = ordered_json::array();
        for (const auto& s : profile) {
            ordered_json r{{"alpha", s.alpha}, {"q", s.q}};
            if (s.error.empty()) {
                r["g_cl"] = json_number(s.g_cl);
                r["g_qu"] = json_number(s.g_qu);
                r["g_total"] = json_number(s.g_total);
                r["oracle"] = json_number(s.oracle);
                r["deviation"] = json_number(s.deviation);
            } else {
                r["error"] = s.error;
            }
            r["degenerate"] = s.degenerate;
            rows.push_back(std::move(r));
        }
        ordered_json rep = report_header("metric", opt);
        rep["warnings"] = warnings;
        rep["results"] = rows;
        rep["status"] = "ok";
        emit_json(rep);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonextensive quantum-statistical toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand

    CommonOpts opt;
    app.add_option("--format", opt.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--tol", opt.tol, "Solver tolerance");
    app.add_option("--max-iter", opt.max_iter, "Solver iteration cap");
    app.add_option("--damping", opt.damping, "Fixed-point damping in (0, 1]");
    app.add_option("--init", opt.init, "Solver initialization")
        ->check(CLI::IsMember({"gibbs_q1", "maximally_mixed"}));

    std::string file_a, file_b;
    double qv = 1.0, beta = 1.0;
    std::string q_range, beta_range;
    double h_opt = 0.0;
    bool richardson = false, strict = false;

    auto* validate = app.add_subcommand("validate", "Check a matrix file");
    validate->add_option("file", file_a, "Matrix JSON file")->required();

    auto* entropy = app.add_subcommand("entropy", "Entropies of a state");
    entropy->add_option("file", file_a, "State JSON file")->required();
    entropy->add_option("--q", qv, "Entropic index");
    entropy->add_option("--q-range", q_range, "Entropic index grid a:b:n");

    auto* divergence = app.add_subcommand("divergence", "Relative entropies of two states");
    divergence->add_option("file", file_a, "Objective state file")->required();
    divergence->add_option("reference", file_b, "Reference state file")->required();
    divergence->add_option("--q", qv, "Entropic index");

    auto* equilibrium = app.add_subcommand("equilibrium", "Solve the equilibrium state");
    equilibrium->add_option("file", file_a, "Hamiltonian JSON file")->required();
    equilibrium->add_option("--beta", beta, "Inverse temperature");
    equilibrium->add_option("--q", qv, "Entropic index");

    auto* scan = app.add_subcommand("scan", "Sweep the (q, beta) grid");
    scan->add_option("file", file_a, "Hamiltonian JSON file")->required();
    scan->add_option("--q-range", q_range, "q grid a:b:n")->required();
    scan->add_option("--beta-range", beta_range, "beta grid a:b:n")->required();

    auto* metric = app.add_subcommand("metric", "Metric profile of a state curve");
    metric->add_option("file", file_a, "Curve JSON file")->required();
    metric->add_option("--q", qv, "Entropic index");
    // "--h" alone collides with the inherited "-h" help short flag.
    metric->set_help_flag("--help", "Print this help message and exit");
    auto* h_flag = metric->add_option("--h", h_opt, "Regrid spacing for family curves");
    metric->add_flag("--richardson", richardson, "Richardson-extrapolate the oracle");
    metric->add_flag("--strict-degeneracy", strict, "Fail on ambiguous branch tracking");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(file_a, opt);
        if (entropy->parsed()) {
            std::vector<double> qs = q_range.empty() ? std::vector<double>{qv}
                                                     : parse_range(q_range);
            return cmd_entropy(file_a, qs, opt);
        }
        if (divergence->parsed()) return cmd_divergence(file_a, file_b, qv, opt);
        if (equilibrium->parsed()) return cmd_equilibrium(file_a, beta, qv, opt);
        if (scan->parsed()) {
            return cmd_scan(file_a, parse_range(q_range), parse_range(beta_range), opt);
        }
        if (metric->parsed()) {
            std::optional<double> h;
            if (h_flag->count() > 0) h = h_opt;
            return cmd_metric(file_a, qv, h, richardson, strict, opt);
        }
    } catch (const SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
