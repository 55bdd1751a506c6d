#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "errors.hpp"
#include "io.hpp"
#include "linalg.hpp"
#include "random.hpp"
#include "semigroup.hpp"
#include "spectral.hpp"
#include "stability.hpp"

namespace semistab::cli {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kNumerical = 3,
    kIndeterminate = 4,
    kSpectrumHit = 5,
};

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

inline json input_json(const io::OperatorInput& in) {
    json j{{"kind", in.kind == io::OperatorInput::Kind::Matrix ? "matrix" : "diagonal"},
           {"n", in.matrix.n()},
           {"label", in.label ? json(*in.label) : json(nullptr)},
           {"rule", nullptr}};
    if (in.rule) {
        j["rule"] = json{{"name", in.rule->name}, {"N", in.rule->count ? json(*in.rule->count) : json(nullptr)}};
    }
    return j;
}

inline json config_json(const AnalyzeConfig& cfg) {
    // threads is deliberately not echoed: output must not depend on it
    return json{{"tol", cfg.tol},
                {"t0", cfg.t0 ? json(*cfg.t0) : json("auto")},
                {"doublings", cfg.doublings},
                {"t_max", cfg.t_max},
                {"subset_cap", cfg.subset_cap},
                {"rel_tol", cfg.rel_tol},
                {"seed", cfg.seed},
                {"scan_samples", cfg.scan_samples}};
}

inline json axis_json(const ResolventScan& s) {
    return json{{"lower", s.lower},
                {"upper", io::finite_or_null(s.upper)},
                {"argmax", s.argmax},
                {"refinement_depth", s.refinement_depth},
                {"truncation_radius", s.truncation_radius},
                {"tail_bound", s.tail_bound},
                {"evaluations", s.evaluations},
                {"converged", s.converged}};
}

inline json gpg_json(const GpgVerdict& v) {
    return json{{"classification", to_string(v.classification)},
                {"rhp_in_resolvent_set", v.rhp_in_resolvent_set},
                {"indeterminate", v.indeterminate},
                {"witness", v.witness ? io::complex_json(*v.witness) : json(nullptr)},
                {"axis_sup", v.axis ? axis_json(*v.axis) : json(nullptr)}};
}

/// Final verdict: the GPG indeterminate flag overrides, otherwise the spectral-bound classification.
inline Classification final_classification(const StabilityReport& r, const GpgVerdict& v) {
    return v.indeterminate ? Classification::Indeterminate : r.classification;
}

inline json report_json(const io::OperatorInput& in, const StabilityReport& r, const GpgVerdict& v,
                        const AnalyzeConfig& cfg) {
    json eig = json::array();
    for (const auto& z : r.eigenvalues) eig.push_back(io::complex_json(z));

    std::vector<std::string> warnings = r.warnings;
    if (!v.indeterminate && v.classification != r.classification)
        warnings.push_back("resolvent criterion and spectral bound disagree");
    if (v.indeterminate) warnings.push_back("spectral bound within rounding of the imaginary axis");
    if (v.axis && !v.axis->converged) warnings.push_back("axis scan stopped before reaching rel_tol");

    const auto& c = r.curve;
    json growth{{"value", r.growth.value},
                {"upper", r.growth.upper},
                {"t0", c.samples.front().t},
                {"t_final", c.samples.back().t},
                {"samples", c.samples.size()},
                {"truncated", c.truncated}};

    json m0 = nullptr;
    if (r.m0) m0 = json{{"value", r.m0->value}, {"method", to_string(r.m0->method)}, {"upper", r.m0->upper}};

    const auto& b = r.best_constant;
    json best{{"omega", b.omega},
              {"grid_sup", b.grid_sup},
              {"certified_upper", io::finite_or_null(b.certified_upper)},
              {"diverging", b.diverging},
              {"t_max", b.t_max},
              {"samples", b.samples}};

    json in_j = input_json(in);
    in_j["eigenvalues"] = std::move(eig);
    return json{{"input", std::move(in_j)},
                {"spectral_bound", r.spectral_bound},
                {"growth_bound_estimate", std::move(growth)},
                {"sbegb_gap", r.sbegb_gap},
                {"scalar_type", r.scalar_type},
                {"m0", std::move(m0)},
                {"best_constant", std::move(best)},
                {"gpg", gpg_json(v)},
                {"classification", to_string(final_classification(r, v))},
                {"warnings", warnings},
                {"version", kVersion},
                {"config", config_json(cfg)}};
}

struct Analysis {
    StabilityReport report;
    GpgVerdict verdict;
    json document;
};

inline Analysis run_analysis(const io::OperatorInput& in, const AnalyzeConfig& cfg) {
    Analysis a;
    a.report = analyze(in.matrix, cfg);
    a.verdict = gpg_classify(in.matrix, cfg.rel_tol, a.report.eigenvalues);
    a.document = report_json(in, a.report, a.verdict, cfg);
    return a;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline void emit(const std::string& content, const std::optional<std::string>& path, std::ostream& out) {
    if (path)
        io::write_file(*path, content);
    else
        out << content;
}

inline int cmd_analyze(const std::string& path, const AnalyzeConfig& cfg, const std::optional<std::string>& out_path,
                       std::ostream& out) {
    const auto in = io::load_operator(path);
    const auto a = run_analysis(in, cfg);
    emit(io::to_json_string(a.document), out_path, out);
    return a.verdict.indeterminate ? kIndeterminate : kOk;
}

inline int cmd_growth_curve(const std::string& path, std::optional<double> t0, int doublings,
                            const std::optional<std::string>& csv_out, std::ostream& out) {
    if (doublings < 1) throw InputError("doublings: must be >= 1");
    const auto in = io::load_operator(path);
    const auto curve = growth_curve(in.matrix, t0.value_or(default_t0(in.matrix)), doublings);
    std::ostringstream csv;
    io::write_growth_csv(curve, csv);
    emit(csv.str(), csv_out, out);
    return kOk;
}

inline std::string enclosure_summary(const ResolventScan& s) {
    std::ostringstream os;
    os << "sup_enclosure [" << io::format_double(s.lower) << ", " << io::format_double(s.upper) << "]"
       << " argmax " << io::format_double(s.argmax) << " depth " << s.refinement_depth << " evaluations "
       << s.evaluations << " converged " << (s.converged ? "true" : "false") << '\n';
    return os.str();
}

inline int cmd_resolvent_scan(const std::string& path, double rel_tol, const std::optional<std::string>& csv_out,
                              std::ostream& out, std::ostream& err) {
    const auto in = io::load_operator(path);
    const auto eig = linalg::eigenvalues(in.matrix);
    const auto v = gpg_classify(in.matrix, rel_tol, eig);
    if (!v.rhp_in_resolvent_set) {
        const complex w = *v.witness;
        err << "semistab: spectrum meets the closed right half-plane; witness eigenvalue " << io::format_double(w.real())
            << (w.imag() < 0 ? " - " : " + ") << io::format_double(std::abs(w.imag())) << "i\n";
        return v.indeterminate ? kIndeterminate : kSpectrumHit;
    }
    std::ostringstream csv;
    io::write_axis_csv(*v.axis, csv);
    if (csv_out)
        io::write_file(*csv_out, csv.str());
    else
        out << csv.str();
    out << enclosure_summary(*v.axis);
    return v.indeterminate ? kIndeterminate : kOk;
}

/// Built-in Borel functions: "exp_t:T", "indicator:j1,j2,..." (0-based distinct-eigenvalue indices),
/// "poly:c0,c1,..." (real coefficients, lowest degree first).
inline int cmd_apply(const std::string& path, const std::string& fn, double tol, const std::optional<std::string>& out_path,
                     std::ostream& out) {
    const auto in = io::load_operator(path);
    const auto colon = fn.find(':');
    const std::string name = fn.substr(0, colon);
    std::vector<double> args;
    if (colon != std::string::npos) {
        std::stringstream ss(fn.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t used = 0;
                args.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::logic_error&) {
                throw InputError("fn: bad argument '" + tok + "'");
            }
        }
    }

    const auto resolution = spectral_resolution(in.matrix, tol);
    const auto* res = std::get_if<SpectralResolution>(&resolution);
    if (!res) throw Error("operator is not scalar-type (" + std::get<Defective>(resolution).reason + ")");

    ComplexMatrix f;
    if (name == "exp_t") {
        if (args.size() != 1) throw InputError("fn: exp_t takes one argument");
        const double t = args[0];
        f = borel_apply(*res, [t](complex z) { return std::exp(t * z); });
    } else if (name == "indicator") {
        std::vector<std::size_t> idx;
        for (double x : args) {
            if (x < 0 || x != std::floor(x)) throw InputError("fn: indicator indices must be non-negative integers");
            idx.push_back(static_cast<std::size_t>(x));
        }
        f = spectral_measure(*res, idx);
    } else if (name == "poly") {
        if (args.empty()) throw InputError("fn: poly needs at least one coefficient");
        f = borel_apply(*res, [&args](complex z) {
            complex acc = 0.0;
            for (auto it = args.rbegin(); it != args.rend(); ++it) acc = acc * z + *it;
            return acc;
        });
    } else {
        throw InputError("fn: unknown function '" + name + "' (expected exp_t, indicator or poly)");
    }
    emit(io::to_json_string(io::matrix_file_json(f, in.label)), out_path, out);
    return kOk;
}

// ---------------------------------------------------------------------------
// Demos
// ---------------------------------------------------------------------------

struct DemoOutput {
    io::OperatorInput input;
    json report;
    std::string growth_csv;
    std::optional<std::string> axis_csv;
    int exit_code = kOk;
};

inline io::OperatorInput matrix_input(ComplexMatrix a, std::string label) {
    io::OperatorInput in;
    in.matrix = std::move(a);
    in.label = std::move(label);
    return in;
}

inline DemoOutput finish_demo(io::OperatorInput in, const Analysis& a, json demo) {
    DemoOutput d;
    d.report = a.document;
    d.report["demo"] = std::move(demo);
    std::ostringstream g;
    io::write_growth_csv(a.report.curve, g);
    d.growth_csv = g.str();
    if (a.verdict.axis) {
        std::ostringstream ax;
        io::write_axis_csv(*a.verdict.axis, ax);
        d.axis_csv = ax.str();
    }
    d.exit_code = a.verdict.indeterminate ? kIndeterminate : kOk;
    d.input = std::move(in);
    return d;
}

inline DemoOutput demo_nilpotent(const AnalyzeConfig& base) {
    auto in = matrix_input(ComplexMatrix{{0, 1}, {0, 0}}, "nilpotent");
    AnalyzeConfig cfg = base;
    cfg.t0 = 1.0;
    cfg.doublings = 10;
    const auto a = run_analysis(in, cfg);

    // ||e^{tA}|| for A = [[0,1],[0,0]] is the largest singular value of [[1,t],[0,1]]
    double worst = 0.0;
    for (double t : {1.0, 10.0, 100.0}) {
        const double exact = std::sqrt((2.0 + t * t + t * std::sqrt(t * t + 4.0)) / 2.0);
        worst = std::max(worst, std::abs(linalg::op_norm(linalg::matrix_exp(in.matrix, t)) - exact) / exact);
    }
    const auto scan200 = best_constant_scan(in.matrix, 0.0, 200.0, cfg.scan_samples);
    json demo{{"name", "nilpotent"},
              {"closed_form_max_rel_error", worst},
              {"final_rate", a.report.curve.samples.back().rate},
              {"final_t", a.report.curve.samples.back().t},
              {"scan_t200", json{{"grid_sup", scan200.grid_sup}, {"diverging", scan200.diverging}}}};
    return finish_demo(std::move(in), a, std::move(demo));
}

inline DemoOutput demo_normal(const AnalyzeConfig& cfg) {
    Rng rng(cfg.seed);
    ComplexVector lambda(6);
    for (auto& z : lambda) z = random_in_box(rng, -3.0, -0.1, -5.0, 5.0);
    auto in = matrix_input(random_normal_matrix(lambda, rng), "normal");
    const auto a = run_analysis(in, cfg);

    const double s = a.report.spectral_bound;
    double worst = 0.0;
    for (int k = 0; k <= 16; ++k) {
        const double t = 0.25 * k;
        const double exact = std::exp(s * t);
        worst = std::max(worst, std::abs(linalg::op_norm(linalg::matrix_exp(in.matrix, t)) - exact) / exact);
    }
    const double m0v = a.report.m0 ? a.report.m0->value : std::numeric_limits<double>::quiet_NaN();
    json demo{{"name", "normal"},
              {"max_relative_deviation", worst},
              {"m0", io::finite_or_null(m0v)},
              {"exp_norm_equals_rate", worst <= 1e-10},
              {"m0_is_one", std::abs(m0v - 1.0) <= 1e-8}};
    return finish_demo(std::move(in), a, std::move(demo));
}

inline DemoOutput demo_similar(const AnalyzeConfig& cfg) {
    // ill-conditioned W applied to a normal (diagonal) generator
    const ComplexVector lambda{complex(-0.5, 0.0), complex(-1.0, 2.0), complex(-1.0, -2.0), complex(-2.0, 0.0)};
    ComplexMatrix w = ComplexMatrix::identity(4);
    for (std::size_t i = 0; i + 1 < 4; ++i) w(i, i + 1) = 3.0;
    auto in = matrix_input(similar_to_diagonal(w, lambda), "similar");
    const auto a = run_analysis(in, cfg);

    const double m0v = a.report.m0 ? a.report.m0->value : std::numeric_limits<double>::quiet_NaN();
    const double grid_sup = a.report.best_constant.grid_sup;
    json demo{{"name", "similar"},
              {"condition_w", linalg::condition(w)},
              {"grid_sup", grid_sup},
              {"m0", io::finite_or_null(m0v)},
              {"four_m0", io::finite_or_null(4.0 * m0v)},
              {"within_bounds", grid_sup >= 1.0 && grid_sup <= 4.0 * m0v}};
    return finish_demo(std::move(in), a, std::move(demo));
}

inline DemoOutput demo_drifting(const AnalyzeConfig& cfg) {
    json truncations = json::array();
    double sup20 = 0.0, sup40 = 0.0;
    for (std::size_t n : {10u, 20u, 40u}) {
        const auto d = DiagonalOperator::drifting(n);
        const auto scan = axis_sup(d.to_matrix(), cfg.rel_tol, d.eigenvalues);
        truncations.push_back(json{{"N", n},
                                   {"lower", scan.lower},
                                   {"upper", io::finite_or_null(scan.upper)},
                                   {"relative_error", std::abs(scan.lower - static_cast<double>(n)) / static_cast<double>(n)}});
        if (n == 20) sup20 = scan.lower;
        if (n == 40) sup40 = scan.lower;
    }
    const auto d40 = DiagonalOperator::drifting(40);
    io::OperatorInput in;
    in.kind = io::OperatorInput::Kind::Diagonal;
    in.diagonal = d40.eigenvalues;
    in.matrix = d40.to_matrix();
    in.label = "drifting";
    in.rule = io::DiagonalRule{"drifting", 40};
    const auto a = run_analysis(in, cfg);
    json demo{{"name", "drifting"}, {"truncations", std::move(truncations)}, {"ratio_40_20", sup40 / sup20}};
    return finish_demo(std::move(in), a, std::move(demo));
}

inline const std::vector<std::string>& demo_names() {
    static const std::vector<std::string> names{"nilpotent", "normal", "similar", "drifting"};
    return names;
}

inline DemoOutput run_demo(const std::string& name, const AnalyzeConfig& cfg) {
    if (name == "nilpotent") return demo_nilpotent(cfg);
    if (name == "normal") return demo_normal(cfg);
    if (name == "similar") return demo_similar(cfg);
    if (name == "drifting") return demo_drifting(cfg);
    throw InputError("demo: unknown demo '" + name + "' (expected nilpotent, normal, similar or drifting)");
}

inline std::string input_file_text(const io::OperatorInput& in) {
    if (in.kind == io::OperatorInput::Kind::Diagonal)
        return io::to_json_string(io::diagonal_file_json(DiagonalOperator{in.diagonal, in.label.value_or("")}, in.rule));
    return io::to_json_string(io::matrix_file_json(in.matrix, in.label));
}

inline int cmd_demo(const std::string& name, const AnalyzeConfig& cfg, const std::optional<std::string>& out_dir,
                    std::ostream& out) {
    const auto d = run_demo(name, cfg);
    const std::string report = io::to_json_string(d.report);
    if (!out_dir) {
        out << report;
        return d.exit_code;
    }
    const std::filesystem::path dir(*out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InputError("out: cannot create directory '" + *out_dir + "'");
    io::write_file((dir / "report.json").string(), report);
    io::write_file((dir / "input.json").string(), input_file_text(d.input));
    io::write_file((dir / "growth.csv").string(), d.growth_csv);
    out << "wrote report.json input.json growth.csv";
    if (d.axis_csv) {
        io::write_file((dir / "axis.csv").string(), *d.axis_csv);
        out << " axis.csv";
    }
    out << '\n';
    return d.exit_code;
}

// ---------------------------------------------------------------------------
// Argument parsing and dispatch
// ---------------------------------------------------------------------------

inline std::optional<double> parse_t0(const std::string& text) {
    if (text == "auto") return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::logic_error&) {
        throw InputError("t0: expected 'auto' or a positive number, got '" + text + "'");
    }
}

inline void validate(const AnalyzeConfig& cfg) {
    if (!(cfg.tol > 0.0)) throw InputError("tol: must be > 0");
    if (cfg.doublings < 1) throw InputError("doublings: must be >= 1");
    if (!(cfg.t_max > 0.0) || !std::isfinite(cfg.t_max)) throw InputError("t-max: must be a positive number");
    if (!(cfg.rel_tol > 0.0) || !(cfg.rel_tol < 1.0)) throw InputError("rel-tol: must lie in (0, 1)");
    if (cfg.threads < 1) throw InputError("threads: must be >= 1");
}

/// Runs the command line (without the program name). Returns the process exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"semistab: spectral bound, growth bound and resolvent checks for matrix semigroups"};
    app.name("semistab");
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    AnalyzeConfig cfg;
    std::string t0_text = "auto";
    std::string file, demo_name, fn;
    std::optional<std::string> out_path, csv_out, axis_csv_out;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "seed for randomised internals")->capture_default_str();
        sub->add_option("--threads", cfg.threads, "worker threads for subset enumeration")->capture_default_str();
    };

    auto* analyze_cmd = app.add_subcommand("analyze", "full stability report for a MatrixFile or DiagonalFile");
    analyze_cmd->add_option("file", file, "input JSON")->required();
    analyze_cmd->add_option("--tol", cfg.tol, "eigen/cluster tolerance")->capture_default_str();
    analyze_cmd->add_option("--t0", t0_text, "first growth sample time or 'auto' (1/||A||)")->capture_default_str();
    analyze_cmd->add_option("--doublings", cfg.doublings, "growth-curve doublings")->capture_default_str();
    analyze_cmd->add_option("--t-max", cfg.t_max, "horizon of the constant scan")->capture_default_str();
    analyze_cmd->add_option("--subset-cap", cfg.subset_cap, "largest eigenvalue count for exact M0")->capture_default_str();
    analyze_cmd->add_option("--rel-tol", cfg.rel_tol, "relative width of the axis-sup enclosure")->capture_default_str();
    analyze_cmd->add_option("--out", out_path, "write the report here instead of stdout");
    add_common(analyze_cmd);

    int doublings = 12;
    auto* growth_cmd = app.add_subcommand("growth-curve", "CSV of ||e^{tA}|| at t0 * 2^k");
    growth_cmd->add_option("file", file, "input JSON")->required();
    growth_cmd->add_option("--t0", t0_text, "first sample time or 'auto'")->capture_default_str();
    growth_cmd->add_option("--doublings", doublings, "number of doublings (>= 1)")->capture_default_str();
    growth_cmd->add_option("--csv-out", csv_out, "CSV path (default stdout)");

    auto* scan_cmd = app.add_subcommand("resolvent-scan", "certified sup of ||R(i omega, A)|| over the imaginary axis");
    scan_cmd->add_option("file", file, "input JSON")->required();
    scan_cmd->add_option("--rel-tol", cfg.rel_tol, "relative enclosure width")->capture_default_str();
    scan_cmd->add_option("--axis-csv-out", axis_csv_out, "CSV of the final grid (default stdout)");

    auto* demo_cmd = app.add_subcommand("demo", "built-in examples: nilpotent, normal, similar, drifting");
    demo_cmd->add_option("name", demo_name, "demo name")->required();
    demo_cmd->add_option("--out", out_path, "directory for report.json, input.json and CSVs");
    add_common(demo_cmd);

    auto* apply_cmd = app.add_subcommand("apply", "F(A) for a built-in F: exp_t:T, indicator:j,..., poly:c0,c1,...");
    apply_cmd->add_option("file", file, "input JSON")->required();
    apply_cmd->add_option("--fn", fn, "function spec")->required();
    apply_cmd->add_option("--tol", cfg.tol, "eigen/cluster tolerance")->capture_default_str();
    apply_cmd->add_option("--out", out_path, "write the MatrixFile here instead of stdout");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::CallForVersion& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        cfg.t0 = parse_t0(t0_text);
        validate(cfg);
        if (*analyze_cmd) return cmd_analyze(file, cfg, out_path, out);
        if (*growth_cmd) return cmd_growth_curve(file, cfg.t0, doublings, csv_out, out);
        if (*scan_cmd) return cmd_resolvent_scan(file, cfg.rel_tol, axis_csv_out, out, err);
        if (*demo_cmd) return cmd_demo(demo_name, cfg, out_path, out);
        if (*apply_cmd) return cmd_apply(file, fn, cfg.tol, out_path, out);
        return kUsage;
    } catch (const InputError& e) {
        err << "semistab: " << e.what() << '\n';
        return kUsage;
    } catch (const PreconditionError& e) {
        err << "semistab: " << e.what() << '\n';
        return kSpectrumHit;
    } catch (const Error& e) {
        err << "semistab: numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        err << "semistab: internal error: " << e.what() << '\n';
        return kInternal;
    }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args), out, err);
}

} // namespace semistab::cli
