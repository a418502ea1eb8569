#include "nnm/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace nnm {

namespace {

constexpr double kPi = std::numbers::pi;

// Ratios >= 1 on this many consecutive significant steps abort the iteration.
constexpr int kMaxExpansions = 3;

bool expanding(const IterationReport& report, double tol, int& streak) {
    if (report.iterates.size() < 2) return false;
    const double prev = report.iterates[report.iterates.size() - 2];
    if (prev > 100.0 * tol && report.ratios.back() >= 1.0)
        ++streak;
    else
        streak = 0;
    return streak >= kMaxExpansions;
}

void finish(const ModalOde& ode, PeriodicSolution& sol, std::size_t grid) {
    sol.omega1 = ode.omega1;
    sol.omega_eps = strained_frequency(ode.omega1, sol.params.eps, sol.params.eta());
    sol.period = 2.0 * kPi / sol.omega_eps;
    sol.residual = norm2(periodicity_F(ode, sol.params, grid));
    sol.report.residual = sol.residual;
    sol.trajectory = integrate(ode, sol.params, Phi::Full, grid);
}

std::vector<double> frequency_ratios(const ModalOde& ode) {
    std::vector<double> r(ode.ratios.size());
    std::transform(ode.ratios.begin(), ode.ratios.end(), r.begin(), [](double v) { return std::sqrt(v); });
    return r;
}

std::string describe(const ResonanceViolation& v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "mode %zu has frequency ratio %.17g", v.mode + 1, v.ratio);
    return buf;
}

struct InnerResult {
    Vector z;
    int iterations = 0;
};

// Damped Newton for H(z) = target with a frozen Jacobian.
InnerResult solve_h(const ModalOde& ode, const ShootingParams& base, const Vector& target, const Vector& start,
                    const LuFactorization& lu, double inner_tol, std::size_t grid) {
    ShootingParams p = base;
    p.y = start;
    Vector r = subtract(estimator_H(ode, p, grid), target);
    double rn = norm2(r);
    InnerResult out{start, 0};
    for (int it = 0; it < 100 && rn > inner_tol; ++it) {
        Vector dz = lu.solve(r);
        bool accepted = false;
        double t = 1.0;
        for (int halving = 0; halving <= 5; ++halving, t *= 0.5) {
            p.y = axpy(-t, dz, out.z);
            Vector trial = subtract(estimator_H(ode, p, grid), target);
            const double tn = norm2(trial);
            if (tn < rn) {
                out.z = p.y;
                r = std::move(trial);
                rn = tn;
                accepted = true;
                break;
            }
        }
        ++out.iterations;
        if (!accepted) {
            // Already at the rounding floor of H.
            if (rn <= 100.0 * inner_tol) break;
            throw Error(ErrorCode::EstimatorSolve,
                        "damped Newton on H failed to reduce the residual " + std::to_string(rn));
        }
        if (t * norm2(dz) <= 1e-3 * inner_tol) break;
    }
    if (!(rn <= 100.0 * inner_tol))
        throw Error(ErrorCode::EstimatorSolve, "damped Newton on H did not converge");
    return out;
}

PeriodicSolution estimator_iteration(const ModalOde& ode, double a1, double eps, const Vector& y0,
                                     const PeriodicOptions& options, const Matrix* jacobian0) {
    PeriodicSolution sol;
    const ResonanceStatus status = check_nonresonance(frequency_ratios(ode), 1e-3);
    for (const auto& v : status.violations) {
        if (v.hard) throw Error(ErrorCode::Resonance, describe(v) + " (integer)");
        sol.warnings.push_back("near resonance: " + describe(v));
    }

    ShootingParams p;
    p.a1 = a1;
    p.eps = eps;
    p.y = y0;
    if (y0.size() != 2 * ode.n) throw Error(ErrorCode::InvalidArgument, "y0 must have 2n entries");

    int streak = 0;
    for (int k = 0; k < options.max_iter; ++k) {
        const Matrix jac = (k == 0 && jacobian0) ? *jacobian0 : jacobian_H(ode, p, options.grid);
        std::optional<LuFactorization> lu;
        try {
            lu.emplace(jac);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SingularMatrix) throw;
            throw Error(ErrorCode::EstimatorSolve, "Jacobian of H is singular");
        }
        Vector target = gap_E(ode, p, options.grid);
        for (double& v : target) v = -v;
        const InnerResult inner = solve_h(ode, p, target, p.y, *lu, 0.1 * options.tol, options.grid);

        const double step = norm2(subtract(inner.z, p.y));
        p.y = inner.z;
        sol.report.record_step(step);
        if (!std::isfinite(step)) throw Error(ErrorCode::BlowUp, "non-finite estimator iterate");
        if (step <= options.tol) {
            sol.params = p;
            finish(ode, sol, options.grid);
            if (!(sol.residual <= options.accept_tol))
                throw NonConvergenceError(ErrorCode::NonConvergence,
                                          "estimator iteration stalled with ||F|| = " + std::to_string(sol.residual),
                                          sol.report);
            sol.report.converged = true;
            return sol;
        }
        if (expanding(sol.report, options.tol, streak))
            throw Error(ErrorCode::NonContraction, "estimator iteration is not contracting");
    }
    throw NonConvergenceError(ErrorCode::NonConvergence,
                              "estimator iteration did not converge in " + std::to_string(options.max_iter) +
                                  " iterations",
                              sol.report);
}

Matrix checked_jacobian(const ModalOde& ode, double a1, double eps, const Vector& y0, std::size_t grid) {
    ShootingParams p;
    p.a1 = a1;
    p.eps = eps;
    p.y = y0;
    if (y0.size() != 2 * ode.n) throw Error(ErrorCode::InvalidArgument, "y0 must have 2n entries");
    Matrix jac = jacobian_H(ode, p, grid);
    const Vector sv = singular_values(jac);
    if (!(sv.back() >= 1e-6 * sv.front()))
        throw Error(ErrorCode::EstimatorSingular, "Jacobian of H is ill-conditioned at the starting point");
    return jac;
}

} // namespace

bool ResonanceStatus::hard() const noexcept {
    return std::any_of(violations.begin(), violations.end(), [](const auto& v) { return v.hard; });
}

double eta0(const NonlinearLaw& law, double a, std::size_t grid) {
    if (a == 0.0) throw Error(ErrorCode::InvalidArgument, "amplitude must be nonzero");
    if (grid == 0) throw Error(ErrorCode::InvalidArgument, "grid must be positive");
    const double h = 2.0 * kPi / static_cast<double>(grid);
    double sum = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
        const double c = std::cos(h * static_cast<double>(i));
        sum += c * law(a * c);
    }
    return sum * h / (a * kPi);
}

double eta0(const ModalOde& ode, double a, std::size_t grid) {
    if (a == 0.0) throw Error(ErrorCode::InvalidArgument, "amplitude must be nonzero");
    if (grid == 0) throw Error(ErrorCode::InvalidArgument, "grid must be positive");
    const double h = 2.0 * kPi / static_cast<double>(grid);
    Vector x(ode.n, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
        const double c = std::cos(h * static_cast<double>(i));
        x[0] = a * c;
        sum += c * ode.nonlinear(x)[0];
    }
    return sum * h / (a * kPi);
}

double strained_frequency(double omega1, double eps, double eta) {
    const double s = 1.0 - eps * eta;
    if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "1 - eps eta must be positive");
    return omega1 / std::sqrt(s);
}

PeriodicSolution find_periodic_1dof_fixed_point(const ModalOde& ode, double a, double eps, double eta_guess,
                                                const PeriodicOptions& options) {
    if (ode.n != 1) throw Error(ErrorCode::InvalidArgument, "fixed-point method needs a single mode");
    PeriodicSolution sol;
    ShootingParams p = ShootingParams::seed(1, a, eps, eta_guess);
    int streak = 0;
    for (int k = 0; k < options.max_iter; ++k) {
        const Trajectory traj = integrate(ode, p, Phi::Full, options.grid);
        Vector xs(traj.x.size());
        for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = traj.x[i][0];
        const double ix = weighted_integral(traj, Weight::Cos, xs);
        if (!(std::abs(ix) > 1e-8 * std::max(1.0, std::abs(a))))
            throw Error(ErrorCode::DegenerateAmplitude, "int cos(s) x(s) ds vanishes");

        double next = 0.0;
        if (eps >= kQuadratureSwitchEps) {
            // int cos f = (b - x'(2 pi)) / eps with b = 0
            const double i_f = -traj.v.back()[0] / eps;
            next = p.eta() + i_f / ix;
        } else {
            Vector gs(xs.size());
            for (std::size_t i = 0; i < gs.size(); ++i) gs[i] = ode.nonlinear(traj.x[i])[0];
            next = (1.0 - eps * p.eta()) * weighted_integral(traj, Weight::Cos, gs) / ix;
        }
        const double step = std::abs(next - p.eta());
        p.y[0] = next;
        sol.report.record_step(step);
        if (!std::isfinite(step)) throw Error(ErrorCode::BlowUp, "non-finite eta iterate");
        if (step <= options.tol) {
            sol.params = p;
            finish(ode, sol, options.grid);
            const Vector f = periodicity_F(ode, p, options.grid);
            if (std::abs(f[0]) > options.accept_tol) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "F1 = %.3e is not negligible; the law may not be even in theta",
                              f[0]);
                sol.warnings.emplace_back(buf);
            }
            sol.report.converged = true;
            return sol;
        }
        if (expanding(sol.report, options.tol, streak))
            throw Error(ErrorCode::NonContraction, "eta fixed-point iteration is not contracting");
    }
    throw NonConvergenceError(ErrorCode::NonConvergence,
                              "eta fixed-point iteration did not converge in " + std::to_string(options.max_iter) +
                                  " iterations",
                              sol.report);
}

PeriodicSolution find_periodic_1dof_fixed_point(const NonlinearLaw& law, double omega, double a, double eps,
                                                double eta_guess, const PeriodicOptions& options) {
    return find_periodic_1dof_fixed_point(make_1dof_ode(law, omega, 0.25), a, eps, eta_guess, options);
}

ResonanceStatus check_nonresonance(std::span<const double> frequency_ratios, double tol_res) {
    ResonanceStatus status;
    for (std::size_t j = 1; j < frequency_ratios.size(); ++j) {
        const double r = frequency_ratios[j];
        const double dist = std::abs(r - std::round(r));
        if (dist < tol_res) status.violations.push_back({j, r, dist <= 1e-12 * std::max(1.0, std::abs(r))});
    }
    return status;
}

ResonanceStatus check_nonresonance(const ModalSystem& modal, std::size_t mode_index, double tol_res) {
    if (mode_index >= modal.size()) throw Error(ErrorCode::InvalidMode, "mode index out of range");
    const double w1 = modal.omega(mode_index);
    if (!(w1 > 1e-8)) throw Error(ErrorCode::InvalidMode, "reference mode is a rigid-body mode");
    std::vector<double> ratios{1.0};
    std::vector<std::size_t> index{mode_index};
    for (std::size_t k = 0; k < modal.size(); ++k) {
        if (k == mode_index) continue;
        ratios.push_back(modal.omega(k) / w1);
        index.push_back(k);
    }
    ResonanceStatus status = check_nonresonance(ratios, tol_res);
    for (auto& v : status.violations) v.mode = index[v.mode];
    return status;
}

Vector linear_mode_seed(const ModalOde& ode, double a1) {
    Vector y(2 * ode.n, 0.0);
    y[0] = eta0(ode, a1);
    return y;
}

PeriodicSolution find_periodic_estimator(const ModalOde& ode, double a1, double eps, const Vector& y0,
                                         const PeriodicOptions& options) {
    const Matrix jac = checked_jacobian(ode, a1, eps, y0, options.grid);
    return estimator_iteration(ode, a1, eps, y0, options, &jac);
}

PeriodicSolution find_periodic_estimator(const OdeBuilder& build, const EstimatorConfig& cfg, double a1,
                                         double eps, const Vector& y0, const PeriodicOptions& options) {
    try {
        return find_periodic_estimator(build(cfg), a1, eps, y0, options);
    } catch (const Error& e) {
        // Slopes of 1/2 reproduce eta(0) for the unilateral law, which leaves
        // H nearly singular in b_1 without tripping the conditioning test.
        const ErrorCode c = e.code();
        if (c != ErrorCode::EstimatorSingular && c != ErrorCode::EstimatorSolve && c != ErrorCode::NonContraction)
            throw;
    }
    EstimatorConfig retry = cfg;
    std::fill(retry.lambda.begin(), retry.lambda.end(), 0.25);
    retry.alpha = 0.25;
    PeriodicSolution sol = find_periodic_estimator(build(retry), a1, eps, y0, options);
    sol.warnings.emplace_back("estimator slopes reduced to 0.25 after the default slopes failed");
    return sol;
}

double exact_period_piecewise_1dof(double omega, double eps) {
    if (!(omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega must be positive");
    if (!(eps > -1.0)) throw Error(ErrorCode::InvalidArgument, "eps must exceed -1");
    return kPi / omega * (1.0 + 1.0 / std::sqrt(1.0 + eps));
}

std::vector<PeriodicSolution> continuation_periodic(const ModalOde& ode, double a1,
                                                    std::span<const double> eps_schedule,
                                                    const PeriodicOptions& options, int max_bisections) {
    if (eps_schedule.empty()) throw Error(ErrorCode::InvalidArgument, "empty eps schedule");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        if (!(eps_schedule[i] >= 0.0) || (i > 0 && !(eps_schedule[i] > eps_schedule[i - 1])))
            throw Error(ErrorCode::InvalidArgument, "eps schedule must be nonnegative and strictly increasing");
    }

    std::vector<PeriodicSolution> stages;
    Vector y = linear_mode_seed(ode, a1);
    double current = 0.0;
    for (double target : eps_schedule) {
        double step = target - current;
        int bisections = 0;
        for (;;) {
            const double next = std::min(current + step, target);
            try {
                PeriodicSolution sol = find_periodic_estimator(ode, a1, next, y, options);
                y = sol.params.y;
                current = next;
                if (next == target) {
                    stages.push_back(std::move(sol));
                    break;
                }
            } catch (const Error& e) {
                const ErrorCode c = e.code();
                if (c != ErrorCode::NonConvergence && c != ErrorCode::NonContraction &&
                    c != ErrorCode::EstimatorSolve && c != ErrorCode::EstimatorSingular && c != ErrorCode::BlowUp)
                    throw;
                if (++bisections > max_bisections)
                    throw PeriodicContinuationStalled("stage eps=" + std::to_string(target) + " failed after " +
                                                          std::to_string(max_bisections) + " bisections",
                                                      stages);
                step *= 0.5;
            }
        }
    }
    return stages;
}

ReturnCheck physical_return_check(const ModalOde& ode, const PeriodicSolution& sol) {
    const PhysicalSystem& sys = ode.physical;
    const std::size_t nd = sys.masses.size();
    const std::size_t steps = sol.trajectory.steps;
    if (steps == 0) throw Error(ErrorCode::InvalidArgument, "solution carries no trajectory");
    const double eps = sol.params.eps;

    Vector x0(ode.n), v0(ode.n);
    for (std::size_t j = 0; j < ode.n; ++j) {
        x0[j] = sol.params.a(j);
        v0[j] = sol.omega_eps * sol.params.b(j);
    }
    const Vector u0 = ode.phi * x0;
    const Vector w0 = ode.phi * v0;

    auto accel = [&](std::span<const double> u) {
        Vector a = sys.stiffness * u;
        if (eps != 0.0) a = axpy(eps, sys.nonlinear(u), a);
        for (std::size_t i = 0; i < nd; ++i) a[i] = -a[i] / sys.masses[i];
        return a;
    };

    const double dt = sol.period / static_cast<double>(steps);
    const ForceMap none;
    const ForceMap& sw = eps != 0.0 ? sys.switches : none;
    Vector u = u0, w = w0;
    for (std::size_t s = 0; s < steps; ++s) rk4_advance(accel, sw, u, w, dt);

    Vector diff = subtract(u, u0), state = u0;
    const Vector dw = subtract(w, w0);
    diff.insert(diff.end(), dw.begin(), dw.end());
    state.insert(state.end(), w0.begin(), w0.end());
    return {norm2(diff), 10.0 * sol.residual * (1.0 + norm2(state))};
}

double observed_contraction(const IterationReport& report, double floor) {
    std::vector<double> r;
    for (std::size_t i = 0; i < report.ratios.size(); ++i)
        if (report.iterates[i] > floor && report.iterates[i + 1] > floor) r.push_back(report.ratios[i]);
    if (r.empty()) return 0.0;
    std::sort(r.begin(), r.end());
    const std::size_t m = r.size() / 2;
    return r.size() % 2 ? r[m] : 0.5 * (r[m - 1] + r[m]);
}

} // namespace nnm
