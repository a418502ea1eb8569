#include "nnm/shooting.hpp"

#include "nnm/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace nnm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_steps(std::size_t steps) {
    if (steps < 256 || (steps & (steps - 1)) != 0)
        throw Error(ErrorCode::InvalidArgument, "grid size must be a power of two >= 256");
}

void check_params(const ModalOde& ode, const ShootingParams& params) {
    if (params.y.size() != 2 * ode.n)
        throw Error(ErrorCode::InvalidArgument, "y must have 2n entries");
    if (!(params.eps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be nonnegative");
}

Vector phi_eval(const ModalOde& ode, Phi which, std::span<const double> x, double eta, double eps) {
    return which == Phi::Full ? ode.f(x, eta, eps) : ode.h(x, eta, eps);
}

void rk4_plain(const Acceleration& acc, Vector& x, Vector& v, double dt) {
    const std::size_t n = x.size();
    Vector xt(n), vt(n);
    const Vector k1v = v, a1 = acc(x);
    for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + 0.5 * dt * k1v[i], vt[i] = v[i] + 0.5 * dt * a1[i];
    const Vector k2v = vt, a2 = acc(xt);
    for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + 0.5 * dt * k2v[i], vt[i] = v[i] + 0.5 * dt * a2[i];
    const Vector k3v = vt, a3 = acc(xt);
    for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + dt * k3v[i], vt[i] = v[i] + dt * a3[i];
    const Vector k4v = vt, a4 = acc(xt);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        v[i] += dt / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
    }
}

std::vector<bool> sign_pattern(const ForceMap& switches, std::span<const double> x) {
    const Vector s = switches(x);
    std::vector<bool> neg(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) neg[j] = s[j] < 0.0;
    return neg;
}

Acceleration modal_acceleration(const ModalOde& ode, Phi which, double eta, double eps) {
    return [&ode, which, eta, eps](std::span<const double> x) {
        Vector out(ode.n, 0.0);
        if (eps != 0.0) {
            const Vector p = phi_eval(ode, which, x, eta, eps);
            for (std::size_t i = 0; i < ode.n; ++i) out[i] = -eps * p[i];
        }
        for (std::size_t i = 0; i < ode.n; ++i) out[i] -= ode.ratios[i] * x[i];
        return out;
    };
}

const ForceMap& kinks(const ModalOde& ode, Phi which, double eps) {
    static const ForceMap none;
    return which == Phi::Full && eps != 0.0 ? ode.switches : none;
}

std::pair<Vector, Vector> initial_state(const ModalOde& ode, const ShootingParams& params) {
    Vector x(ode.n), v(ode.n);
    for (std::size_t j = 0; j < ode.n; ++j) {
        x[j] = params.a(j);
        v[j] = params.b(j);
    }
    return {x, v};
}

bool finite(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

Vector residual(const ModalOde& ode, const ShootingParams& params, Phi which, std::size_t steps) {
    check_params(ode, params);
    const std::size_t n = ode.n;
    Vector r(2 * n);
    Vector xe, ve;
    if (params.eps >= kQuadratureSwitchEps) {
        std::tie(xe, ve) = shoot(ode, params, which, steps);
        r[0] = (xe[0] - params.a1) / params.eps;
        r[1] = (params.b(0) - ve[0]) / params.eps;
    } else {
        const Trajectory traj = integrate(ode, params, which, steps);
        Vector first(traj.x.size());
        for (std::size_t i = 0; i < traj.x.size(); ++i)
            first[i] = phi_eval(ode, which, traj.x[i], params.eta(), params.eps)[0];
        r[0] = weighted_integral(traj, Weight::Sin, first);
        r[1] = weighted_integral(traj, Weight::Cos, first);
        xe = traj.x.back();
        ve = traj.v.back();
    }
    for (std::size_t j = 1; j < n; ++j) {
        r[2 * j] = xe[j] - params.a(j);
        r[2 * j + 1] = ve[j] - params.b(j);
    }
    return r;
}

Matrix central_jacobian(const ModalOde& ode, const ShootingParams& params, Phi which, std::size_t steps) {
    const std::size_t m = params.y.size();
    const double h = 1e-6 * std::max(1.0, norm2(params.y));
    Matrix jac(m, m);
    for (std::size_t k = 0; k < m; ++k) {
        ShootingParams plus = params, minus = params;
        plus.y[k] += h;
        minus.y[k] -= h;
        const Vector rp = residual(ode, plus, which, steps);
        const Vector rm = residual(ode, minus, which, steps);
        for (std::size_t i = 0; i < m; ++i) jac(i, k) = (rp[i] - rm[i]) / (2.0 * h);
    }
    return jac;
}

} // namespace

namespace {

void refine(const Acceleration& acc, const ForceMap& switches, Vector& x, Vector& v, double dt, int depth) {
    if (depth == 0) {
        rk4_plain(acc, x, v, dt);
        return;
    }
    const std::vector<bool> before = sign_pattern(switches, x);
    Vector xs = x, vs = v;
    rk4_plain(acc, xs, vs, dt);
    if (sign_pattern(switches, xs) == before) {
        x = std::move(xs);
        v = std::move(vs);
        return;
    }
    const double sub = dt / kKinkSubsteps;
    for (int k = 0; k < kKinkSubsteps; ++k) refine(acc, switches, x, v, sub, depth - 1);
}

} // namespace

void rk4_advance(const Acceleration& acc, const ForceMap& switches, Vector& x, Vector& v, double dt) {
    if (switches)
        refine(acc, switches, x, v, dt, kKinkDepth);
    else
        rk4_plain(acc, x, v, dt);
}

Vector ModalOde::f(std::span<const double> x, double eta, double eps) const {
    Vector g = nonlinear(x);
    for (std::size_t j = 0; j < n; ++j) g[j] = -eta * ratios[j] * x[j] + (1.0 - eps * eta) * g[j];
    return g;
}

Vector ModalOde::h(std::span<const double> x, double eta, double eps) const {
    Vector g = estimator(x);
    for (std::size_t j = 0; j < n; ++j) g[j] = -eta * ratios[j] * x[j] + (1.0 - eps * eta) * g[j];
    return g;
}

std::size_t lowest_elastic_mode(const ModalSystem& modal) {
    for (std::size_t k = 0; k < modal.size(); ++k)
        if (modal.omega(k) > 1e-8) return k;
    throw Error(ErrorCode::InvalidMode, "model has no elastic mode");
}

ModalOde build_modal_ode(const PhysicalSystem& system, const ModalSystem& modal, std::size_t mode_index,
                         double lipschitz_nonlinear, double lipschitz_estimator, double lipschitz_gap) {
    const std::size_t n = modal.size();
    if (mode_index >= n) throw Error(ErrorCode::InvalidMode, "mode index out of range");
    const double omega1 = modal.omega(mode_index);
    if (!(omega1 > 1e-8))
        throw Error(ErrorCode::InvalidMode, "selected mode is a zero (rigid-body) mode");

    std::vector<std::size_t> order{mode_index};
    for (std::size_t k = 0; k < n; ++k)
        if (k != mode_index) order.push_back(k);

    ModalOde ode;
    ode.n = n;
    ode.omega1 = omega1;
    ode.ratios.resize(n);
    ode.phi = Matrix(modal.phi.rows(), n);
    for (std::size_t c = 0; c < n; ++c) {
        ode.ratios[c] = modal.omega2[order[c]] / (omega1 * omega1);
        for (std::size_t i = 0; i < modal.phi.rows(); ++i) ode.phi(i, c) = modal.phi(i, order[c]);
    }
    ode.physical = system;

    const double scale = 1.0 / (omega1 * omega1);
    auto project = [phi = ode.phi, scale](const ForceMap& force) -> ForceMap {
        return [phi, scale, force](std::span<const double> x) {
            Vector g = transpose_times(phi, force(phi * x));
            for (double& v : g) v *= scale;
            return g;
        };
    };
    ode.nonlinear = project(system.nonlinear);
    if (system.switches)
        ode.switches = [phi = ode.phi, sw = system.switches](std::span<const double> x) { return sw(phi * x); };
    ode.estimator = project(system.estimator);
    ode.lipschitz_nonlinear = lipschitz_nonlinear * scale;
    ode.lipschitz_estimator = lipschitz_estimator * scale;
    ode.lipschitz_gap = lipschitz_gap * scale;
    return ode;
}

ModalOde build_modal_ode(const StructureModel& model, const ModalSystem& modal, const EstimatorConfig& cfg,
                         std::size_t mode_index) {
    model.validate();
    cfg.validate(model.n_springs());

    PhysicalSystem system;
    system.masses = model.masses;
    system.stiffness = model.stiffness();
    system.epsilon = model.epsilon;
    const Matrix b = model.incidence;
    const Vector ep = model.unilateral_stiffness;
    const Vector d = model.gaps;
    const Vector lambda = cfg.lambda;
    system.nonlinear = [b, ep, d](std::span<const double> u) {
        Vector s = b * u;
        for (std::size_t j = 0; j < s.size(); ++j) s[j] = ep[j] * negative_part(s[j] + d[j]);
        return transpose_times(b, s);
    };
    system.estimator = [b, ep, d, lambda](std::span<const double> u) {
        Vector s = b * u;
        for (std::size_t j = 0; j < s.size(); ++j) s[j] = ep[j] * lambda[j] * (s[j] + d[j]);
        return transpose_times(b, s);
    };

    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < ep.size(); ++j)
        if (ep[j] != 0.0) active.push_back(j);
    system.switches = [b, d, active](std::span<const double> u) {
        const Vector s = b * u;
        Vector out(active.size());
        for (std::size_t k = 0; k < active.size(); ++k) out[k] = s[active[k]] + d[active[k]];
        return out;
    };

    // Bounds in modal coordinates: ||Phi^T B^T E' S B Phi|| <= max|E' S| ||B Phi||^2.
    const double bphi = induced_norm2(b * modal.phi);
    double max_ep = 0.0, max_l = 0.0, max_gap_slope = 0.0;
    for (std::size_t j = 0; j < ep.size(); ++j) {
        max_ep = std::max(max_ep, ep[j]);
        max_l = std::max(max_l, ep[j] * lambda[j]);
        max_gap_slope = std::max(max_gap_slope, ep[j] * std::max(lambda[j], 1.0 - lambda[j]));
    }
    return build_modal_ode(system, modal, mode_index, max_ep * bphi * bphi, max_l * bphi * bphi,
                           max_gap_slope * bphi * bphi);
}

ModalOde build_modal_ode(const StructureModel& model, const EstimatorConfig& cfg) {
    const ModalSystem modal = generalized_modes(model.stiffness(), model.masses);
    return build_modal_ode(model, modal, cfg, lowest_elastic_mode(modal));
}

ModalOde make_1dof_ode(const NonlinearLaw& law, double omega, double alpha) {
    if (!(omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "omega must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    const double w2 = omega * omega;
    PhysicalSystem system;
    system.masses = {1.0};
    system.stiffness = Matrix(1, 1, w2);
    system.nonlinear = [law, w2](std::span<const double> u) { return Vector{w2 * law(u[0])}; };

    double gap_slope = 0.0;
    if (law.kind == NonlinearLaw::Kind::Unilateral) {
        const double s = alpha * law.stiffness, d = law.gap;
        system.estimator = [s, d, w2](std::span<const double> u) { return Vector{w2 * s * (u[0] + d)}; };
        gap_slope = std::abs(law.stiffness) * std::max(alpha, 1.0 - alpha);
        system.switches = [d](std::span<const double> u) { return Vector{u[0] + d}; };
    } else {
        system.estimator = [alpha, w2](std::span<const double> u) { return Vector{w2 * alpha * u[0]}; };
        gap_slope = law.lipschitz + alpha;
    }
    const double est_slope = law.kind == NonlinearLaw::Kind::Unilateral ? alpha * std::abs(law.stiffness) : alpha;

    ModalSystem modal{Vector{w2}, Matrix(1, 1, 1.0)};
    return build_modal_ode(system, modal, 0, w2 * law.lipschitz, w2 * est_slope, w2 * gap_slope);
}

ShootingParams ShootingParams::seed(std::size_t n, double a1, double eps, double eta) {
    ShootingParams p;
    p.a1 = a1;
    p.eps = eps;
    p.y.assign(2 * n, 0.0);
    p.y[0] = eta;
    return p;
}

void Trajectory::write_csv(std::ostream& out) const {
    out << "theta";
    for (std::size_t j = 0; j < n; ++j) out << ",x" << j + 1;
    for (std::size_t j = 0; j < n; ++j) out << ",v" << j + 1;
    out << '\n';
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (std::size_t i = 0; i < theta.size(); ++i) {
        put(theta[i]);
        for (double v : x[i]) out << ',', put(v);
        for (double w : v[i]) out << ',', put(w);
        out << '\n';
    }
}

Trajectory integrate(const ModalOde& ode, const ShootingParams& params, Phi which, std::size_t steps) {
    check_steps(steps);
    check_params(ode, params);
    Trajectory traj;
    traj.n = ode.n;
    traj.steps = steps;
    traj.step = kTwoPi / static_cast<double>(steps);
    traj.theta.resize(steps + 1);
    traj.x.reserve(steps + 1);
    traj.v.reserve(steps + 1);

    auto [x, v] = initial_state(ode, params);
    const Acceleration acc = modal_acceleration(ode, which, params.eta(), params.eps);
    const ForceMap& sw = kinks(ode, which, params.eps);
    traj.theta[0] = 0.0;
    traj.x.push_back(x);
    traj.v.push_back(v);
    for (std::size_t i = 1; i <= steps; ++i) {
        rk4_advance(acc, sw, x, v, traj.step);
        if (!finite(x) || !finite(v)) throw Error(ErrorCode::BlowUp, "non-finite state during integration");
        traj.theta[i] = traj.step * static_cast<double>(i);
        traj.x.push_back(x);
        traj.v.push_back(v);
    }
    return traj;
}

std::pair<Vector, Vector> shoot(const ModalOde& ode, const ShootingParams& params, Phi which, std::size_t steps) {
    check_steps(steps);
    check_params(ode, params);
    auto [x, v] = initial_state(ode, params);
    const Acceleration acc = modal_acceleration(ode, which, params.eta(), params.eps);
    const ForceMap& sw = kinks(ode, which, params.eps);
    const double dt = kTwoPi / static_cast<double>(steps);
    for (std::size_t i = 0; i < steps; ++i) rk4_advance(acc, sw, x, v, dt);
    if (!finite(x) || !finite(v)) throw Error(ErrorCode::BlowUp, "non-finite state during integration");
    return {x, v};
}

double weighted_integral(const Trajectory& traj, Weight weight, std::span<const double> values) {
    if (values.size() != traj.theta.size())
        throw Error(ErrorCode::InvalidArgument, "values must be sampled on the trajectory grid");
    const std::size_t last = values.size() - 1;
    double sum = 0.0;
    for (std::size_t i = 0; i <= last; ++i) {
        const double w = weight == Weight::Sin ? std::sin(traj.theta[i]) : std::cos(traj.theta[i]);
        const double c = (i == 0 || i == last) ? 0.5 : 1.0;
        sum += c * w * values[i];
    }
    return sum * traj.step;
}

Vector periodicity_F(const ModalOde& ode, const ShootingParams& params, std::size_t steps) {
    return residual(ode, params, Phi::Full, steps);
}

Vector estimator_H(const ModalOde& ode, const ShootingParams& params, std::size_t steps) {
    return residual(ode, params, Phi::Estimator, steps);
}

Vector gap_E(const ModalOde& ode, const ShootingParams& params, std::size_t steps) {
    return subtract(periodicity_F(ode, params, steps), estimator_H(ode, params, steps));
}

Matrix jacobian_H(const ModalOde& ode, const ShootingParams& params, std::size_t steps) {
    return central_jacobian(ode, params, Phi::Estimator, steps);
}

Matrix jacobian_F(const ModalOde& ode, const ShootingParams& params, std::size_t steps) {
    return central_jacobian(ode, params, Phi::Full, steps);
}

} // namespace nnm
