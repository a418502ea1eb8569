#pragma once

/**
 * @file static_solver.hpp
 * @brief Static equilibrium f(u) = Y of a model with unilateral springs.
 *
 * The quasi-Newton iteration splits f = h + e with the linear estimator h and
 * solves h(x_{k+1}) = Y - e(x_k). K_eps is factorized once per solve.
 */

#include "nnm/error.hpp"
#include "nnm/model.hpp"

#include <vector>

namespace nnm {

struct IterationReport {
    std::vector<double> iterates; ///< ||x_{k+1} - x_k|| per iteration
    std::vector<double> ratios;   ///< iterates[k+1] / iterates[k]
    bool converged = false;
    double residual = 0.0;
    double measured_contraction = 0.0; ///< max ratio after the second iteration

    std::size_t iterations() const noexcept { return iterates.size(); }

    /// Appends a step norm and refreshes ratios and measured_contraction.
    void record_step(double step);
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(ErrorCode code, const std::string& message, IterationReport report)
        : Error(code, message), report_(std::move(report)) {}
    const IterationReport& report() const noexcept { return report_; }

private:
    IterationReport report_;
};

struct StaticOptions {
    double tol = 1e-10;
    int max_iter = 200;
};

struct StaticSolution {
    Vector x;
    IterationReport report;
    double condition = 0.0; ///< 1-norm condition number of the iteration matrix
};

/// Default starting point: the eps = 0 linear solution when K is invertible, else zero.
Vector default_start(const StructureModel& model, std::span<const double> load);

StaticSolution quasi_newton_solve(const StructureModel& model, const EstimatorConfig& cfg,
                                  std::span<const double> load, std::span<const double> x0,
                                  const StaticOptions& options = {});

/// K u_{k+1} = Y - eps B^T E' (B u_k + d)_-. Singular K propagates Error(SingularMatrix).
StaticSolution natural_iteration(const StructureModel& model, std::span<const double> load,
                                 std::span<const double> x0, const StaticOptions& options = {});

struct ContinuationStage {
    double epsilon = 0.0;
    StaticSolution solution;
};

class StaticContinuationStalled : public Error {
public:
    StaticContinuationStalled(const std::string& message, std::vector<ContinuationStage> partial)
        : Error(ErrorCode::ContinuationStalled, message), partial_(std::move(partial)) {}
    const std::vector<ContinuationStage>& partial() const noexcept { return partial_; }

private:
    std::vector<ContinuationStage> partial_;
};

/// Warm-started sweep over an increasing eps schedule. A failed stage is
/// retried from the last converged point with the eps step halved, at most
/// `max_bisections` times. Only the scheduled values are returned.
std::vector<ContinuationStage> continuation_solve(const StructureModel& model, const EstimatorConfig& cfg,
                                                  std::span<const double> load,
                                                  std::span<const double> eps_schedule,
                                                  std::span<const double> x0, const StaticOptions& options = {},
                                                  int max_bisections = 6);

} // namespace nnm
