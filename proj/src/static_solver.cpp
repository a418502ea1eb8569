#include "nnm/static_solver.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace nnm {

void IterationReport::record_step(double step) {
    iterates.push_back(step);
    if (iterates.size() >= 2) {
        const double prev = iterates[iterates.size() - 2];
        ratios.push_back(prev > 0.0 ? step / prev : 0.0);
        if (ratios.size() >= 2) measured_contraction = std::max(measured_contraction, ratios.back());
    }
}

namespace {

void check_load(const StructureModel& model, std::span<const double> load, std::span<const double> x0) {
    if (load.size() != model.n_dof || x0.size() != model.n_dof)
        throw Error(ErrorCode::InvalidArgument, "load and start vectors must have n_dof entries");
}

double residual_norm(const StructureModel& model, std::span<const double> x, std::span<const double> load) {
    return norm2(subtract(internal_force(model, x), load));
}

// eps B^T E' (B x + d)_-
Vector unilateral_force(const StructureModel& model, std::span<const double> x) {
    const Vector gamma = model.incidence * x;
    Vector s(gamma.size());
    for (std::size_t j = 0; j < s.size(); ++j)
        s[j] = model.epsilon * model.unilateral_stiffness[j] * negative_part(gamma[j] + model.gaps[j]);
    return transpose_times(model.incidence, s);
}

template <class Step>
StaticSolution iterate(const StructureModel& model, std::span<const double> load, std::span<const double> x0,
                       const StaticOptions& options, const char* name, Step&& step) {
    StaticSolution out;
    Vector x(x0.begin(), x0.end());
    for (int k = 0; k < options.max_iter; ++k) {
        Vector next = step(x);
        const double dx = norm2(subtract(next, x));
        x = std::move(next);
        out.report.record_step(dx);
        if (!std::isfinite(dx)) break;
        if (dx <= options.tol) {
            out.report.residual = residual_norm(model, x, load);
            if (out.report.residual <= options.tol) {
                out.report.converged = true;
                out.x = std::move(x);
                return out;
            }
        }
    }
    out.report.residual = residual_norm(model, x, load);
    throw NonConvergenceError(ErrorCode::NonConvergence,
                              std::string(name) + " did not converge in " + std::to_string(options.max_iter) +
                                  " iterations",
                              out.report);
}

} // namespace

Vector default_start(const StructureModel& model, std::span<const double> load) {
    try {
        return lu_solve(model.stiffness(), load);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularMatrix) throw;
        return Vector(model.n_dof, 0.0);
    }
}

StaticSolution quasi_newton_solve(const StructureModel& model, const EstimatorConfig& cfg,
                                  std::span<const double> load, std::span<const double> x0,
                                  const StaticOptions& options) {
    check_load(model, load, x0);
    cfg.validate(model.n_springs());

    std::optional<LuFactorization> lu;
    try {
        lu.emplace(estimator_matrix(model, cfg));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularMatrix) throw;
        throw Error(ErrorCode::EstimatorSingular, "K_eps = K + eps B^T E' Lambda B is singular");
    }

    // Constant part of h: eps B^T E' Lambda d.
    Vector offset(model.n_springs());
    for (std::size_t j = 0; j < offset.size(); ++j)
        offset[j] = model.epsilon * model.unilateral_stiffness[j] * cfg.lambda[j] * model.gaps[j];
    const Vector rhs0 = subtract(load, transpose_times(model.incidence, offset));

    auto solution = iterate(model, load, x0, options, "quasi-Newton iteration", [&](const Vector& x) {
        return lu->solve(subtract(rhs0, gap_force(model, cfg, x)));
    });
    solution.condition = lu->condition_1norm();
    return solution;
}

StaticSolution natural_iteration(const StructureModel& model, std::span<const double> load,
                                 std::span<const double> x0, const StaticOptions& options) {
    check_load(model, load, x0);
    const LuFactorization lu(model.stiffness());
    auto solution = iterate(model, load, x0, options, "natural iteration", [&](const Vector& x) {
        return lu.solve(subtract(load, unilateral_force(model, x)));
    });
    solution.condition = lu.condition_1norm();
    return solution;
}

std::vector<ContinuationStage> continuation_solve(const StructureModel& model, const EstimatorConfig& cfg,
                                                  std::span<const double> load,
                                                  std::span<const double> eps_schedule,
                                                  std::span<const double> x0, const StaticOptions& options,
                                                  int max_bisections) {
    if (eps_schedule.empty()) throw Error(ErrorCode::InvalidArgument, "empty eps schedule");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        if (!(eps_schedule[i] >= 0.0) || (i > 0 && !(eps_schedule[i] > eps_schedule[i - 1])))
            throw Error(ErrorCode::InvalidArgument, "eps schedule must be nonnegative and strictly increasing");
    }

    std::vector<ContinuationStage> stages;
    Vector x(x0.begin(), x0.end());
    double current = 0.0;
    StructureModel staged = model;

    for (double target : eps_schedule) {
        double step = target - current;
        int bisections = 0;
        for (;;) {
            const double next = std::min(current + step, target);
            staged.epsilon = next;
            try {
                auto sol = quasi_newton_solve(staged, cfg, load, x, options);
                x = sol.x;
                current = next;
                if (next == target) {
                    stages.push_back({target, std::move(sol)});
                    break;
                }
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NonConvergence) throw;
                if (++bisections > max_bisections)
                    throw StaticContinuationStalled("stage eps=" + std::to_string(target) + " failed after " +
                                                        std::to_string(max_bisections) + " bisections",
                                                    stages);
                step *= 0.5;
            }
        }
    }
    return stages;
}

} // namespace nnm
