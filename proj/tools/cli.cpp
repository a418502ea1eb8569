#include "cli.hpp"

#include "nnm/periodic.hpp"
#include "nnm/report.hpp"
#include "nnm/shooting.hpp"
#include "nnm/static_solver.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

namespace nnm::cli {

namespace fs = std::filesystem;

namespace {

bool is_config_error(ErrorCode code) { return code == ErrorCode::InvalidArgument || code == ErrorCode::Parse; }

bool needs_model(const std::string& command) { return command != "oracle"; }

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    f << text;
}

fs::path output_dir(const RunConfig& cfg) {
    fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::InvalidArgument, "cannot create output directory " + dir.string());
    return dir;
}

StructureModel load(const RunConfig& cfg) {
    StructureModel model = load_model(cfg.model_path);
    if (cfg.eps) model.epsilon = *cfg.eps;
    return model;
}

EstimatorConfig estimator(const RunConfig& cfg, const StructureModel& model) {
    const double alpha = cfg.alpha.value_or(0.25);
    // A single spring is the scalar case; its slope is alpha.
    const double lambda = cfg.lambda.value_or(model.n_springs() == 1 ? alpha : 0.5);
    EstimatorConfig ec = EstimatorConfig::uniform(model.n_springs(), lambda, alpha);
    ec.validate(model.n_springs());
    return ec;
}

PeriodicOptions periodic_options(const RunConfig& cfg) {
    PeriodicOptions o;
    o.tol = cfg.tol;
    o.grid = cfg.grid;
    return o;
}

std::string csv_row(std::span<const double> values) {
    std::string row;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) row += ',';
        row += format_double(values[i]);
    }
    return row;
}

int run_static(const RunConfig& cfg, std::ostream& out) {
    const StructureModel model = load(cfg);
    Vector y = cfg.load;
    if (y.empty()) y.assign(model.n_dof, 0.0);
    if (y.size() == 1) y.assign(model.n_dof, y[0]);
    if (y.size() != model.n_dof) throw Error(ErrorCode::InvalidArgument, "--load needs one value or one per dof");

    StaticOptions opts;
    opts.tol = cfg.tol;
    const Vector x0 = default_start(model, y);
    StaticSolution sol = cfg.method == "natural" ? natural_iteration(model, y, x0, opts)
                                                 : quasi_newton_solve(model, estimator(cfg, model), y, x0, opts);

    const fs::path dir = output_dir(cfg);
    write_file(dir / "static.json", static_json(sol, model.epsilon));
    std::string csv = "dof,u\n";
    for (std::size_t i = 0; i < sol.x.size(); ++i) csv += std::to_string(i + 1) + ',' + format_double(sol.x[i]) + '\n';
    write_file(dir / "solution.csv", csv);
    out << "converged in " << sol.report.iterations() << " iterations, residual " << format_double(sol.report.residual)
        << '\n';
    return Ok;
}

int run_modes(const RunConfig& cfg, std::ostream& out) {
    const StructureModel model = load(cfg);
    const ModalSystem modal = generalized_modes(model.stiffness(), model.masses);
    std::string csv = "mode,omega2,omega";
    for (std::size_t i = 0; i < model.n_dof; ++i) csv += ",phi" + std::to_string(i + 1);
    csv += '\n';
    for (std::size_t k = 0; k < modal.size(); ++k) {
        Vector row{static_cast<double>(k + 1), modal.omega2[k], modal.omega(k)};
        const Vector shape = modal.phi.column(k);
        row.insert(row.end(), shape.begin(), shape.end());
        csv += csv_row(row) + '\n';
    }
    write_file(output_dir(cfg) / "modes.csv", csv);
    out << csv;
    return Ok;
}

struct PeriodicSetup {
    StructureModel model;
    ModalSystem modal;
    std::size_t mode = 0;
    EstimatorConfig ec;

    ModalOde build(const EstimatorConfig& c) const { return build_modal_ode(model, modal, c, mode); }
};

PeriodicSetup periodic_setup(const RunConfig& cfg) {
    PeriodicSetup s;
    s.model = load(cfg);
    s.modal = generalized_modes(s.model.stiffness(), s.model.masses);
    s.mode = lowest_elastic_mode(s.modal);
    s.ec = estimator(cfg, s.model);
    return s;
}

PeriodicSolution solve_one(const PeriodicSetup& s, const RunConfig& cfg, double eps) {
    const auto builder = [&s](const EstimatorConfig& c) { return s.build(c); };
    const ModalOde ode = s.build(s.ec);
    if (cfg.method == "fixed-point") {
        if (ode.n != 1) throw Error(ErrorCode::InvalidArgument, "--method fixed-point needs a one-dof model");
        return find_periodic_1dof_fixed_point(ode, cfg.a1, eps, eta0(ode, cfg.a1), periodic_options(cfg));
    }
    return find_periodic_estimator(builder, s.ec, cfg.a1, eps, linear_mode_seed(ode, cfg.a1), periodic_options(cfg));
}

int run_periodic(const RunConfig& cfg, std::ostream& out) {
    const PeriodicSetup s = periodic_setup(cfg);
    const PeriodicSolution sol = solve_one(s, cfg, s.model.epsilon);
    const fs::path dir = output_dir(cfg);
    write_file(dir / "solution.json", periodic_json(sol));
    std::ofstream traj(dir / "trajectory.csv", std::ios::binary);
    sol.trajectory.write_csv(traj);
    out << "omega_eps " << format_double(sol.omega_eps) << ", period " << format_double(sol.period) << ", residual "
        << format_double(sol.residual) << '\n';
    for (const auto& w : sol.warnings) out << "warning: " << w << '\n';
    return Ok;
}

Vector schedule(const RunConfig& cfg, double start) {
    const double stop = *cfg.eps_to;
    if (!(stop > start) && cfg.eps_steps > 1)
        throw Error(ErrorCode::InvalidArgument, "--eps-to must exceed the starting eps");
    Vector eps;
    if (cfg.eps_steps == 1) return {stop};
    for (int i = 0; i < cfg.eps_steps; ++i)
        eps.push_back(start + (stop - start) * static_cast<double>(i) / static_cast<double>(cfg.eps_steps - 1));
    return eps;
}

std::vector<PeriodicSolution> warm_sweep(const PeriodicSetup& s, const RunConfig& cfg, const Vector& eps) {
    try {
        return continuation_periodic(s.build(s.ec), cfg.a1, eps, periodic_options(cfg));
    } catch (const Error& e) {
        const auto* stalled = dynamic_cast<const PeriodicContinuationStalled*>(&e);
        const bool retry = (stalled && stalled->partial().empty()) || e.code() == ErrorCode::EstimatorSingular;
        if (!retry) throw;
    }
    EstimatorConfig slow = s.ec;
    std::fill(slow.lambda.begin(), slow.lambda.end(), 0.25);
    slow.alpha = 0.25;
    return continuation_periodic(s.build(slow), cfg.a1, eps, periodic_options(cfg));
}

std::vector<PeriodicSolution> cold_sweep(const PeriodicSetup& s, const RunConfig& cfg, const Vector& eps) {
    std::vector<std::future<PeriodicSolution>> jobs;
    for (double e : eps) jobs.push_back(std::async(std::launch::async, [&s, &cfg, e] { return solve_one(s, cfg, e); }));
    std::vector<PeriodicSolution> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

int run_sweep(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.eps_to) throw Error(ErrorCode::InvalidArgument, "sweep needs --eps-to");
    const PeriodicSetup s = periodic_setup(cfg);
    const Vector eps = schedule(cfg, cfg.eps.value_or(0.0));
    const std::vector<PeriodicSolution> stages = cfg.cold_start ? cold_sweep(s, cfg, eps) : warm_sweep(s, cfg, eps);

    const fs::path dir = output_dir(cfg);
    std::string summary = "eps,eta,omega_eps,residual,iterations\n";
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const auto& st = stages[i];
        char name[32];
        std::snprintf(name, sizeof name, "stage_%03zu.json", i);
        write_file(dir / name, periodic_json(st));
        summary += csv_row(std::vector<double>{st.params.eps, st.params.eta(), st.omega_eps, st.residual}) + ',' +
                   std::to_string(st.report.iterations()) + '\n';
    }
    write_file(dir / "summary.csv", summary);
    out << summary;
    return Ok;
}

int run_oracle(const RunConfig& cfg, std::ostream& out) {
    out << format_double(exact_period_piecewise_1dof(cfg.omega, cfg.eps.value_or(0.0))) << '\n';
    return Ok;
}

void report_error(const RunConfig& cfg, const Error& e, std::ostream& err) {
    err << "error: " << e.what() << '\n';
    try {
        write_file(output_dir(cfg) / "error.json", error_json(e));
    } catch (const Error&) {
        // The error itself is already on stderr.
    }
}

} // namespace

std::string validate(const RunConfig& cfg) {
    static const std::vector<std::string> commands{"static", "modes", "periodic", "sweep", "oracle"};
    if (std::find(commands.begin(), commands.end(), cfg.command) == commands.end())
        return "unknown command '" + cfg.command + "'";
    if (needs_model(cfg.command)) {
        if (cfg.model_path.empty()) return "--model is required";
        if (!fs::exists(cfg.model_path)) return "model file " + cfg.model_path + " does not exist";
    }
    if (cfg.grid < 256 || (cfg.grid & (cfg.grid - 1)) != 0) return "--grid must be a power of two >= 256";
    if (!(cfg.tol > 0.0)) return "--tol must be positive";
    if (cfg.eps_steps < 1) return "--eps-steps must be at least 1";
    if (cfg.method != "quasi" && cfg.method != "natural" && cfg.method != "fixed-point")
        return "--method must be quasi, natural or fixed-point";
    if ((cfg.command == "periodic" || cfg.command == "sweep") && cfg.a1 == 0.0) return "--a1 must be nonzero";
    return {};
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (const std::string problem = validate(cfg); !problem.empty()) {
        report_error(cfg, Error(ErrorCode::InvalidArgument, problem), err);
        return ConfigError;
    }
    try {
        if (cfg.command == "static") return run_static(cfg, out);
        if (cfg.command == "modes") return run_modes(cfg, out);
        if (cfg.command == "periodic") return run_periodic(cfg, out);
        if (cfg.command == "sweep") return run_sweep(cfg, out);
        return run_oracle(cfg, out);
    } catch (const Error& e) {
        report_error(cfg, e, err);
        return is_config_error(e.code()) ? ConfigError : SolverError;
    }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Static equilibria and nonlinear normal modes of unilateral spring-mass models", "nnm"};
    app.require_subcommand(1);

    RunConfig cfg;
    double eps = 0.0, eps_to = 0.0, alpha = 0.0, lambda = 0.0;
    struct Flags {
        CLI::Option *eps, *eps_to, *alpha, *lambda;
    };
    std::vector<std::pair<CLI::App*, Flags>> subs;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"static", "solve f(u) = Y"},
        {"modes", "generalized eigenmodes"},
        {"periodic", "one periodic solution"},
        {"sweep", "periodic solutions over an eps schedule"},
        {"oracle", "exact period of the unilateral one-dof oscillator"}};
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--model", cfg.model_path, "model JSON file");
        sub->add_option("--out", cfg.output_dir, "output directory");
        Flags f{};
        f.eps = sub->add_option("--eps", eps, "nonlinearity scale (sweep start)");
        f.eps_to = sub->add_option("--eps-to", eps_to, "sweep end");
        sub->add_option("--eps-steps", cfg.eps_steps, "number of sweep stages");
        sub->add_option("--a1", cfg.a1, "amplitude of the selected mode");
        f.alpha = sub->add_option("--alpha", alpha, "one-dof estimator slope");
        f.lambda = sub->add_option("--lambda", lambda, "estimator slope for every spring");
        sub->add_option("--tol", cfg.tol, "iteration tolerance");
        sub->add_option("--grid", cfg.grid, "integration steps per period");
        sub->add_option("--method", cfg.method, "quasi, natural or fixed-point");
        sub->add_flag("--cold-start", cfg.cold_start, "solve sweep stages independently");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--load", cfg.load, "static load, one value or one per dof")->delimiter(',');
        sub->add_option("--omega", cfg.omega, "oracle frequency");
        subs.emplace_back(sub, f);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : ConfigError;
    }

    for (const auto& [sub, f] : subs) {
        if (!sub->parsed()) continue;
        cfg.command = sub->get_name();
        if (*f.eps) cfg.eps = eps;
        if (*f.eps_to) cfg.eps_to = eps_to;
        if (*f.alpha) cfg.alpha = alpha;
        if (*f.lambda) cfg.lambda = lambda;
    }
    return run(cfg, out, err);
}

} // namespace nnm::cli
