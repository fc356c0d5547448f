#include "resign/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "resign/io.hpp"
#include "resign/models.hpp"
#include "resign/pipeline.hpp"

namespace resign::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

// Thrown for bad flag values after CLI11 parsing succeeded.
struct UsageError : Error {
    using Error::Error;
};

struct InputOptions {
    std::string input;
    std::string model;
    std::vector<std::string> params;
    double t0 = kUnset;
    double t1 = kUnset;
    double dt = kUnset;
    int grid_refine = 1;
    double tol = 1e-8;
};

void add_input_options(CLI::App* cmd, InputOptions& in) {
    cmd->add_option("--input", in.input, "trajectory file");
    cmd->add_option("--model", in.model, "built-in model name (see 'models')");
    cmd->add_option("--param", in.params, "model parameter k=v (repeatable)");
    cmd->add_option("--t0", in.t0, "model grid start (default: model's)");
    cmd->add_option("--t1", in.t1, "model grid end (default: model's)");
    cmd->add_option("--dt", in.dt, "model grid spacing (default: model's)");
    cmd->add_option("--grid-refine", in.grid_refine, "divide the model grid spacing by k")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", in.tol, "density validation tolerance for sampled models")->check(CLI::PositiveNumber);
}

ModelParams parse_params(const std::vector<std::string>& items) {
    ModelParams out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--param expects k=v, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        try {
            std::size_t used = 0;
            out[key] = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::logic_error&) {
            throw UsageError("--param " + key + ": '" + value + "' is not a number");
        }
    }
    return out;
}

std::vector<double> model_grid(const TrajectoryModel& model, const InputOptions& in) {
    const double t0 = std::isnan(in.t0) ? model.default_t0() : in.t0;
    const double t1 = std::isnan(in.t1) ? model.default_t1() : in.t1;
    const double dt = (std::isnan(in.dt) ? model.default_dt() : in.dt) / in.grid_refine;
    return uniform_grid(t0, t1, dt);
}

Trajectory load_input(const InputOptions& in) {
    if (in.input.empty() == in.model.empty()) throw UsageError("give exactly one of --input or --model");
    if (!in.input.empty()) {
        if (in.grid_refine != 1) throw UsageError("--grid-refine applies to --model inputs only");
        if (!in.params.empty()) throw UsageError("--param applies to --model inputs only");
        return io::load_trajectory(in.input);
    }
    const auto model = library_model(in.model, parse_params(in.params));
    return model->sample(model_grid(*model, in), in.tol);
}

SignPolicy read_policy_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError(path, 0, "cannot open policy file");
    std::vector<Sign> signs;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) {
            if (tok[0] == '#') break;
            if (tok == "+" || tok == "nonneg") {
                signs.push_back(Sign::Nonnegative);
            } else if (tok == "-" || tok == "nonpos") {
                signs.push_back(Sign::Nonpositive);
            } else {
                throw ParseError(path, line_no, "expected '+', '-', 'nonneg' or 'nonpos', got '" + tok + "'");
            }
        }
    }
    if (signs.empty()) throw ParseError(path, line_no, "policy file lists no signs");
    return SignPolicy::per_round(std::move(signs));
}

SignPolicy parse_policy(const std::string& text, int dim) {
    if (text == "nonneg") return SignPolicy::all_nonnegative();
    if (text == "nonpos") return SignPolicy::all_nonpositive();
    if (text == "alternating") return SignPolicy::alternating(dim);
    if (text.rfind("file:", 0) == 0) return read_policy_file(text.substr(5));
    throw UsageError("--policy must be nonneg, nonpos, alternating or file:<path>, got '" + text + "'");
}

SingularityPolicy parse_singularity(const std::string& text) {
    if (text == "error") return SingularityPolicy::error();
    if (text.rfind("cap:", 0) == 0) {
        const std::string v = text.substr(4);
        double g = 0.0;
        try {
            std::size_t used = 0;
            g = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
        } catch (const std::logic_error&) {
            throw UsageError("--singularity cap:<gamma_max> needs a number, got '" + v + "'");
        }
        if (!(g > 0.0)) throw UsageError("--singularity cap:<gamma_max> needs gamma_max > 0");
        return SingularityPolicy::cap(g);
    }
    throw UsageError("--singularity must be error or cap:<gamma_max>, got '" + text + "'");
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw UsageError("cannot write " + path.string());
    return os;
}

void write_meta(const fs::path& dir, const std::string& command, const std::vector<std::string>& args) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream stamp;
    stamp << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    nlohmann::json meta = {
        {"command", command},
        {"arguments", args},
        {"timestamp", stamp.str()},
        {"threads", configure_threads_from_env()},
    };
    open_out(dir / "run_meta.json") << meta.dump(2) << '\n';
}

std::string format_interval(const TimeInterval& iv) {
    return "[" + io::format_double(iv.start) + ", " + io::format_double(iv.end) + "]";
}

// synthesize ---------------------------------------------------------------

struct SynthesizeOptions {
    InputOptions input;
    std::string policy = "nonneg";
    std::string singularity = "error";
    double eps_f = kUnset;
    double eps_p = 1e-10;
    double tol_offdiag = kUnset;
    std::string ordering = "match";
    std::string out = "out";
};

int cmd_synthesize(const SynthesizeOptions& o, const std::vector<std::string>& args, std::ostream& out) {
    const Trajectory traj = load_input(o.input);
    const int dim = static_cast<int>(traj.dim());

    SynthesisOptions synth;
    synth.policy = parse_policy(o.policy, dim);
    synth.policy.check(dim);
    synth.singularity = parse_singularity(o.singularity);
    if (!std::isnan(o.eps_f)) synth.eps_f = o.eps_f;
    synth.eps_p = o.eps_p;

    AnalysisOptions analysis_opts;
    if (o.ordering == "ascending") {
        analysis_opts.tracking.ordering = FrameOrdering::Ascending;
    } else if (o.ordering != "match") {
        throw UsageError("--ordering must be match or ascending");
    }
    if (!std::isnan(o.tol_offdiag)) analysis_opts.tol_offdiag = o.tol_offdiag;

    const FrameAnalysis analysis = analyze_trajectory(traj, analysis_opts);
    const SynthesisResult result = synthesize_rates(analysis, synth);

    const fs::path dir = o.out;
    fs::create_directories(dir);
    {
        auto os = open_out(dir / "rates.csv");
        io::write_rates(os, analysis.times, result.terms);
    }
    {
        std::vector<ComplexMatrix> H;
        H.reserve(analysis.size());
        for (const auto& h : analysis.hamiltonians) H.push_back(h.H);
        auto os = open_out(dir / "operators.txt");
        io::write_operators(os, analysis.frames, H);
    }
    {
        auto os = open_out(dir / "intervals.csv");
        io::write_intervals(os, {result.singular_intervals, result.capped_intervals});
    }
    io::save_trajectory(dir / "input.txt", traj);

    double max_rate = 0.0, max_deficit = 0.0, max_antiherm = 0.0, max_offdiag = 0.0;
    for (const auto& terms : result.terms) {
        for (const auto& t : terms) max_rate = std::max(max_rate, std::abs(t.rate));
    }
    for (double d : result.flux_deficit) max_deficit = std::max(max_deficit, d);
    for (const auto& h : analysis.hamiltonians) max_antiherm = std::max(max_antiherm, h.antihermitian_residual);
    for (const auto& fd : analysis.derivatives) max_offdiag = std::max(max_offdiag, fd.offdiag_residual);

    std::ostringstream summary;
    summary << "# lindblad-resign synthesis summary\n";
    summary << "dim = " << dim << '\n';
    summary << "points = " << analysis.size() << '\n';
    summary << "t_start = " << io::format_double(analysis.times.front()) << '\n';
    summary << "t_end = " << io::format_double(analysis.times.back()) << '\n';
    summary << "policy = " << synth.policy.describe() << '\n';
    summary << "singularity = " << o.singularity << '\n';
    summary << "total_terms = " << result.total_terms << '\n';
    summary << "sign_compliant_terms = " << result.sign_compliant << '\n';
    summary << "sign_violations = " << result.total_terms - result.sign_compliant << '\n';
    summary << "max_terms_per_point = " << result.max_terms_per_point << '\n';
    summary << "max_abs_rate = " << io::format_double(max_rate) << '\n';
    summary << "max_flux_deficit = " << io::format_double(max_deficit) << '\n';
    summary << "max_hamiltonian_antihermitian_residual = " << io::format_double(max_antiherm) << '\n';
    summary << "max_frame_offdiag_residual = " << io::format_double(max_offdiag) << '\n';
    summary << "singular_intervals = " << result.singular_intervals.size() << '\n';
    for (const auto& iv : result.singular_intervals) summary << "singular = " << format_interval(iv) << '\n';
    summary << "capped_intervals = " << result.capped_intervals.size() << '\n';
    for (const auto& iv : result.capped_intervals) summary << "capped = " << format_interval(iv) << '\n';
    open_out(dir / "summary.txt") << summary.str();
    write_meta(dir, "synthesize", args);

    out << summary.str();
    out << "artifacts written to " << dir.string() << '\n';
    return kOk;
}

// verify -------------------------------------------------------------------

struct VerifyOptions {
    InputOptions input;
    std::string artifacts;
    std::string out;
    double max_state_error = 1e-4;
    int substeps = 1;
    bool exact_derivatives = false;
};

int cmd_verify(const VerifyOptions& o, const std::vector<std::string>& args, std::ostream& out) {
    const fs::path dir = o.artifacts;
    InputOptions in = o.input;
    if (in.input.empty() && in.model.empty()) in.input = (dir / "input.txt").string();
    const Trajectory traj = load_input(in);

    auto open_in = [](const fs::path& p) {
        std::ifstream is(p);
        if (!is) throw ParseError(p.string(), 0, "cannot open artifact");
        return is;
    };
    auto ops_in = open_in(dir / "operators.txt");
    const auto ops = io::read_operators(ops_in, (dir / "operators.txt").string());
    auto rates_in = open_in(dir / "rates.csv");
    const auto rates = io::read_rates(rates_in, static_cast<int>(traj.dim()), (dir / "rates.csv").string());
    io::IntervalSet intervals;
    if (fs::exists(dir / "intervals.csv")) {
        auto iv_in = open_in(dir / "intervals.csv");
        intervals = io::read_intervals(iv_in, (dir / "intervals.csv").string());
    }
    const LindbladGenerator gen = io::generator_from_artifacts(ops, rates, intervals);
    if (gen.grid != traj.times) throw GridMismatch("trajectory grid does not match the artifact grid");
    if (gen.dim() != traj.dim()) throw GridMismatch("trajectory and artifacts differ in dimension");

    VerificationOptions vopts;
    vopts.integration.substeps = o.substeps;
    vopts.use_exact_derivatives = o.exact_derivatives;
    const VerificationReport report = verify_reconstruction(traj, gen, vopts);
    const bool passed = report.max_state_error <= o.max_state_error;

    const fs::path out_dir = o.out.empty() ? dir : fs::path(o.out);
    fs::create_directories(out_dir);
    std::ostringstream text;
    io::write_report(text, report, o.max_state_error, passed);
    open_out(out_dir / "report.txt") << text.str();
    {
        auto os = open_out(out_dir / "report_points.csv");
        io::write_report_points(os, report);
    }
    write_meta(out_dir, "verify", args);
    out << text.str();
    return passed ? kOk : kVerificationFailure;
}

// simulate -----------------------------------------------------------------

struct SimulateOptions {
    InputOptions input;
    bool use_generator = false;
    int substeps = 4;
    std::string out = "out";
};

int cmd_simulate(const SimulateOptions& o, const std::vector<std::string>& args, std::ostream& out) {
    if (o.input.model.empty() || !o.input.input.empty()) throw UsageError("simulate needs --model (and no --input)");
    const auto model = library_model(o.input.model, parse_params(o.input.params));
    const auto grid = model_grid(*model, o.input);

    Trajectory traj;
    if (!o.use_generator) {
        traj = model->sample(grid, o.input.tol);
    } else {
        const auto generator = model->generator();
        if (!generator) throw UsageError("model '" + o.input.model + "' has no closed-form generator");
        const auto& [H, terms] = *generator;
        const auto gen = LindbladGenerator::constant(grid, H, terms);
        const auto states = integrate(model->rho(grid.front()), gen, {o.substeps});
        traj.times = grid;
        for (const auto& rho : states) {
            traj.states.push_back(validate_density(rho, o.input.tol));
            traj.derivatives.push_back(lindblad_rhs(rho, H, terms));
        }
    }

    const fs::path dir = o.out;
    fs::create_directories(dir);
    io::save_trajectory(dir / "trajectory.txt", traj, o.input.tol);
    write_meta(dir, "simulate", args);
    out << "wrote " << traj.size() << " points of model '" << model->name() << "' to "
        << (dir / "trajectory.txt").string() << '\n';
    return kOk;
}

// demo-jc ------------------------------------------------------------------

struct DemoOptions {
    std::vector<std::string> params;
    double t0 = 0.0;
    double t1 = 6.25;
    double dt = 0.01;
    double eps_p = 1e-10;
    std::string out;
};

// Rates of σ− (γ1) and σ+ (γ2) from the compensation of the diagonal state.
std::pair<std::string, std::string> demo_rates(const RealVector& p, const RealVector& f, Sign sign, double t,
                                               double eps_p) {
    RateProblem problem{p, f, -1.0, eps_p, t};
    const SignPolicy policy = sign == Sign::Nonnegative ? SignPolicy::all_nonnegative() : SignPolicy::all_nonpositive();
    try {
        const auto comp = compensate(problem, policy);
        double g1 = 0.0, g2 = 0.0;
        for (const auto& term : comp.terms) {
            (term.spec.to() == 1 ? g1 : g2) += term.rate;
        }
        return {io::format_double(g1), io::format_double(g2)};
    } catch (const SingularRate&) {
        return {"", ""};
    }
}

int cmd_demo_jc(const DemoOptions& o, std::ostream& out) {
    ModelParams params = parse_params(o.params);
    JCParams jc;
    for (const auto& [key, value] : params) {
        if (key == "omega") {
            jc.omega = value;
        } else if (key == "rho11") {
            jc.rho11 = value;
        } else {
            throw UsageError("demo-jc accepts parameters omega and rho11, got '" + key + "'");
        }
    }
    jc.check();

    std::ostringstream csv;
    csv << "t,gamma1_nonneg,gamma2_nonneg,gamma1_nonpos,gamma2_nonpos,lambda1\n";
    for (double t : uniform_grid(o.t0, o.t1, o.dt)) {
        // The JC state stays diagonal, so its eigenbasis is (|e>, |g>) at all
        // times and λ1 = ρ_ee is the eigenvalue connected to the excited state.
        const ComplexMatrix rho = jc_exact(jc, t).matrix();
        const ComplexMatrix drho = jc_exact_derivative(jc, t);
        RealVector p(2), f(2);
        p << rho(0, 0).real(), rho(1, 1).real();
        f << drho(0, 0).real(), drho(1, 1).real();
        const auto [g1p, g2p] = demo_rates(p, f, Sign::Nonnegative, t, o.eps_p);
        const auto [g1n, g2n] = demo_rates(p, f, Sign::Nonpositive, t, o.eps_p);
        csv << io::format_double(t) << ',' << g1p << ',' << g2p << ',' << g1n << ',' << g2n << ','
            << io::format_double(p(0)) << '\n';
    }
    if (o.out.empty()) {
        out << csv.str();
    } else {
        const fs::path path = o.out;
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        open_out(path) << csv.str();
    }
    return kOk;
}

// models -------------------------------------------------------------------

int cmd_models(std::ostream& out) {
    for (const auto& m : model_catalog()) {
        out << m.name << "  " << m.description << '\n';
        for (const auto& [key, value] : m.defaults) out << "    " << key << " = " << io::format_double(value) << '\n';
    }
    return kOk;
}

int exit_code_for(const std::exception& e, int failure_code) {
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const GridMismatch*>(&e) || dynamic_cast<const UnknownModel*>(&e) ||
        dynamic_cast<const InvalidInitialState*>(&e) || dynamic_cast<const InvalidPolicy*>(&e) ||
        dynamic_cast<const InvalidDensity*>(&e) || dynamic_cast<const DimMismatch*>(&e) ||
        dynamic_cast<const InsufficientStencil*>(&e)) {
        return kUsage;
    }
    return failure_code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    configure_threads_from_env();

    CLI::App app{"Re-sign Lindblad rates: synthesize time-local master equations from density-matrix trajectories",
                 "lindblad-resign"};
    app.require_subcommand(1);

    SynthesizeOptions synth;
    auto* synth_cmd = app.add_subcommand("synthesize", "derive H(t) and jump rates from a trajectory");
    add_input_options(synth_cmd, synth.input);
    synth_cmd->add_option("--policy", synth.policy, "nonneg | nonpos | alternating | file:<path>");
    synth_cmd->add_option("--singularity", synth.singularity, "error | cap:<gamma_max>");
    synth_cmd->add_option("--eps-f", synth.eps_f, "flux threshold (default 1e-12*max(1, max|f|))")
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--eps-p", synth.eps_p, "eigenvalue threshold for rate denominators")
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--tol-offdiag", synth.tol_offdiag, "frame off-diagonal residual tolerance")
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--ordering", synth.ordering, "first-frame column order: match | ascending");
    synth_cmd->add_option("--out", synth.out, "artifact directory");

    VerifyOptions verify;
    auto* verify_cmd = app.add_subcommand("verify", "re-integrate synthesized artifacts against the trajectory");
    add_input_options(verify_cmd, verify.input);
    verify_cmd->add_option("--artifacts", verify.artifacts, "directory written by synthesize")->required();
    verify_cmd->add_option("--out", verify.out, "report directory (default: artifact directory)");
    verify_cmd->add_option("--max-state-error", verify.max_state_error, "pass bound on max state error")
        ->check(CLI::PositiveNumber);
    verify_cmd->add_option("--substeps", verify.substeps, "RK4 substeps per grid interval")->check(CLI::PositiveNumber);
    verify_cmd->add_flag("--exact-derivatives", verify.exact_derivatives,
                         "use the file's drho blocks for the rhs residual");

    SimulateOptions sim;
    auto* sim_cmd = app.add_subcommand("simulate", "write a model trajectory file");
    add_input_options(sim_cmd, sim.input);
    sim_cmd->add_flag("--generator", sim.use_generator, "integrate the model's generator with RK4 instead of sampling");
    sim_cmd->add_option("--substeps", sim.substeps, "RK4 substeps per grid interval")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--out", sim.out, "output directory");

    DemoOptions demo;
    auto* demo_cmd = app.add_subcommand("demo-jc", "JC rate curves under both sign policies (CSV)");
    demo_cmd->add_option("--param", demo.params, "omega=… or rho11=…");
    demo_cmd->add_option("--t0", demo.t0, "grid start");
    demo_cmd->add_option("--t1", demo.t1, "grid end");
    demo_cmd->add_option("--dt", demo.dt, "grid spacing")->check(CLI::PositiveNumber);
    demo_cmd->add_option("--eps-p", demo.eps_p, "eigenvalue threshold")->check(CLI::PositiveNumber);
    demo_cmd->add_option("--out", demo.out, "CSV path (default: stdout)");

    auto* models_cmd = app.add_subcommand("models", "list built-in models and their parameters");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    int failure_code = kSynthesisFailure;
    try {
        if (*synth_cmd) return cmd_synthesize(synth, args, out);
        if (*verify_cmd) {
            failure_code = kVerificationFailure;
            return cmd_verify(verify, args, out);
        }
        if (*sim_cmd) return cmd_simulate(sim, args, out);
        if (*demo_cmd) return cmd_demo_jc(demo, out);
        if (*models_cmd) return cmd_models(out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e, failure_code);
    }
    return kUsage;
}

}  // namespace resign::cli
