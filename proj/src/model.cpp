#include "nnm/model.hpp"

#include "nnm/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace nnm {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

void check_dim(const StructureModel& model, std::span<const double> u) {
    require(u.size() == model.n_dof, "displacement has " + std::to_string(u.size()) +
                                         " entries, model has " + std::to_string(model.n_dof) + " dofs");
}

// B^T diag(w) v
Vector weighted_transpose(const Matrix& b, std::span<const double> w, std::span<const double> v) {
    Vector s(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) s[j] = w[j] * v[j];
    return transpose_times(b, s);
}

} // namespace

void StructureModel::validate() const {
    require(n_dof >= 1, "n_dof must be positive");
    require(masses.size() == n_dof, "masses must have n_dof entries");
    for (double m : masses) require(m > 0.0 && std::isfinite(m), "masses must be strictly positive");
    require(incidence.cols() == n_dof, "incidence must have n_dof columns");
    const std::size_t ns = n_springs();
    require(linear_stiffness.size() == ns && unilateral_stiffness.size() == ns && gaps.size() == ns,
            "per-spring vectors must match the incidence rows");
    require(epsilon >= 0.0 && std::isfinite(epsilon), "epsilon must be nonnegative");
    for (std::size_t j = 0; j < ns; ++j) {
        require(linear_stiffness[j] >= 0.0 && unilateral_stiffness[j] >= 0.0,
                "stiffnesses must be nonnegative");
        require(std::isfinite(gaps[j]), "gaps must be finite");
        int count = 0;
        double sum = 0.0;
        for (double v : incidence.row(j)) {
            require(v == 0.0 || v == 1.0 || v == -1.0, "incidence entries must be -1, 0 or 1");
            if (v != 0.0) {
                ++count;
                sum += v;
            }
        }
        require(count >= 1 && count <= 2, "each spring must touch one or two dofs");
        require(count == 1 || sum == 0.0, "a two-dof spring needs entries of opposite sign");
    }
    const Matrix k = stiffness();
    const double scale = frobenius_norm(k);
    const auto eig = symmetric_eigen(k);
    require(eig.values.empty() || eig.values.front() >= -1e-12 * scale,
            "stiffness matrix is not positive semidefinite");
}

Matrix StructureModel::stiffness() const {
    const Matrix& b = incidence;
    Matrix k(n_dof, n_dof);
    for (std::size_t s = 0; s < b.rows(); ++s) {
        const double e = linear_stiffness[s];
        if (e == 0.0) continue;
        for (std::size_t i = 0; i < n_dof; ++i) {
            if (b(s, i) == 0.0) continue;
            for (std::size_t j = 0; j < n_dof; ++j) k(i, j) += b(s, i) * e * b(s, j);
        }
    }
    return k;
}

EstimatorConfig EstimatorConfig::uniform(std::size_t n_springs, double lambda, double alpha) {
    return EstimatorConfig{Vector(n_springs, lambda), alpha};
}

void EstimatorConfig::validate(std::size_t n_springs) const {
    require(lambda.size() == n_springs, "lambda must have one entry per spring");
    for (double l : lambda) require(l > 0.0 && l < 1.0, "lambda entries must lie in (0, 1)");
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    require(alpha != 0.5, "alpha = 1/2 coincides with eta(0) of the unilateral law");
}

NonlinearLaw NonlinearLaw::unilateral(double stiffness, double gap) {
    NonlinearLaw law;
    law.kind = Kind::Unilateral;
    law.stiffness = stiffness;
    law.gap = gap;
    law.lipschitz = std::abs(stiffness);
    return law;
}

NonlinearLaw NonlinearLaw::make_custom(std::function<double(double)> g, double lipschitz) {
    require(static_cast<bool>(g), "custom law needs an evaluator");
    require(lipschitz >= 0.0, "Lipschitz constant must be nonnegative");
    NonlinearLaw law;
    law.kind = Kind::Custom;
    law.custom = std::move(g);
    law.lipschitz = lipschitz;
    return law;
}

double NonlinearLaw::operator()(double x) const {
    if (kind == Kind::Unilateral) return stiffness * negative_part(x + gap);
    return custom(x);
}

double NonlinearLaw::observed_lipschitz(std::size_t pairs, double range, unsigned seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-range, range);
    double worst = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
        const double x1 = dist(rng), x2 = dist(rng);
        if (x1 == x2) continue;
        worst = std::max(worst, std::abs((*this)(x2) - (*this)(x1)) / std::abs(x2 - x1));
    }
    return worst;
}

Matrix chain_incidence(std::size_t n, Boundary boundary) {
    require(n >= 1, "chain needs at least one mass");
    if (boundary == Boundary::FixedLeft) {
        Matrix b(n, n);
        b(0, 0) = -1.0;
        for (std::size_t j = 1; j < n; ++j) {
            b(j, j - 1) = 1.0;
            b(j, j) = -1.0;
        }
        return b;
    }
    Matrix b(n + 1, n);
    b(0, 0) = 1.0;
    for (std::size_t j = 1; j < n; ++j) {
        b(j, j - 1) = -1.0;
        b(j, j) = 1.0;
    }
    b(n, n - 1) = -1.0;
    return b;
}

StructureModel chain_model(std::size_t n, Boundary boundary, Vector masses, Vector linear_stiffness,
                           Vector unilateral_stiffness, double epsilon, Vector gaps) {
    StructureModel m;
    m.n_dof = n;
    m.masses = std::move(masses);
    m.incidence = chain_incidence(n, boundary);
    m.linear_stiffness = std::move(linear_stiffness);
    m.unilateral_stiffness = std::move(unilateral_stiffness);
    m.gaps = gaps.empty() ? Vector(m.n_springs(), 0.0) : std::move(gaps);
    m.epsilon = epsilon;
    m.validate();
    return m;
}

Vector internal_force(const StructureModel& model, std::span<const double> u) {
    check_dim(model, u);
    const Vector gamma = model.incidence * u;
    Vector stress(gamma.size());
    for (std::size_t j = 0; j < gamma.size(); ++j)
        stress[j] = model.linear_stiffness[j] * gamma[j] +
                    model.epsilon * model.unilateral_stiffness[j] * negative_part(gamma[j] + model.gaps[j]);
    return transpose_times(model.incidence, stress);
}

Vector estimator_force(const StructureModel& model, const EstimatorConfig& cfg, std::span<const double> u) {
    check_dim(model, u);
    require(cfg.lambda.size() == model.n_springs(), "lambda must have one entry per spring");
    const Vector gamma = model.incidence * u;
    Vector stress(gamma.size());
    for (std::size_t j = 0; j < gamma.size(); ++j)
        stress[j] = model.linear_stiffness[j] * gamma[j] +
                    model.epsilon * model.unilateral_stiffness[j] * cfg.lambda[j] * (gamma[j] + model.gaps[j]);
    return transpose_times(model.incidence, stress);
}

Matrix estimator_matrix(const StructureModel& model, const EstimatorConfig& cfg) {
    require(cfg.lambda.size() == model.n_springs(), "lambda must have one entry per spring");
    StructureModel stiffened = model;
    for (std::size_t j = 0; j < model.n_springs(); ++j)
        stiffened.linear_stiffness[j] += model.epsilon * model.unilateral_stiffness[j] * cfg.lambda[j];
    return stiffened.stiffness();
}

Vector gap_force(const StructureModel& model, const EstimatorConfig& cfg, std::span<const double> u) {
    check_dim(model, u);
    const Vector gamma = model.incidence * u;
    Vector s(gamma.size());
    for (std::size_t j = 0; j < gamma.size(); ++j) {
        const double arg = gamma[j] + model.gaps[j];
        s[j] = negative_part(arg) - cfg.lambda[j] * arg;
    }
    Vector out = weighted_transpose(model.incidence, model.unilateral_stiffness, s);
    for (double& v : out) v *= model.epsilon;
    return out;
}

double lipschitz_gap_bound(const StructureModel& model, const EstimatorConfig& cfg) {
    require(cfg.lambda.size() == model.n_springs(), "lambda must have one entry per spring");
    double slope = 0.0;
    for (double l : cfg.lambda) slope = std::max(slope, std::max(l, 1.0 - l));
    double stiff = 0.0;
    for (double e : model.unilateral_stiffness) stiff = std::max(stiff, e);
    return model.epsilon * slope * induced_norm2(model.incidence) * stiff;
}

double lipschitz_gap_bound_scalar(double alpha, double epsilon) {
    return epsilon * std::max(alpha, 1.0 - alpha);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

StructureModel parse_model(const std::string& json_text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
    try {
        StructureModel m;
        const long n = doc.at("n_dof").get<long>();
        if (n < 1) throw Error(ErrorCode::InvalidArgument, "n_dof must be positive");
        m.n_dof = static_cast<std::size_t>(n);
        m.masses = doc.at("masses").get<Vector>();
        m.epsilon = doc.value("epsilon", 0.0);
        const auto& springs = doc.at("springs");
        m.incidence = Matrix(springs.size(), m.n_dof);
        std::size_t row = 0;
        for (const auto& s : springs) {
            const auto dofs = s.at("dofs").get<std::vector<long>>();
            for (long d : dofs)
                if (d < 0 || d >= n) throw Error(ErrorCode::InvalidArgument, "spring dof index out of range");
            if (dofs.size() == 1) {
                const double sign = s.value("sign", 1.0);
                if (sign != 1.0 && sign != -1.0)
                    throw Error(ErrorCode::InvalidArgument, "support spring sign must be +1 or -1");
                m.incidence(row, static_cast<std::size_t>(dofs[0])) = sign;
            } else if (dofs.size() == 2 && dofs[0] != dofs[1]) {
                // strain = u[dofs[1]] - u[dofs[0]]
                m.incidence(row, static_cast<std::size_t>(dofs[0])) = -1.0;
                m.incidence(row, static_cast<std::size_t>(dofs[1])) = 1.0;
            } else {
                throw Error(ErrorCode::InvalidArgument, "spring dofs must list one or two distinct indices");
            }
            m.linear_stiffness.push_back(s.value("E", 0.0));
            m.unilateral_stiffness.push_back(s.value("Eprime", 0.0));
            m.gaps.push_back(s.value("d", 0.0));
            ++row;
        }
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
}

StructureModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open model file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string serialize_model(const StructureModel& model) {
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["n_dof"] = model.n_dof;
    doc["masses"] = model.masses;
    ordered_json springs = ordered_json::array();
    for (std::size_t j = 0; j < model.n_springs(); ++j) {
        ordered_json s;
        std::vector<std::size_t> dofs;
        double sign = 1.0;
        std::size_t neg = 0, pos = 0;
        int count = 0;
        for (std::size_t i = 0; i < model.n_dof; ++i) {
            const double v = model.incidence(j, i);
            if (v == 0.0) continue;
            ++count;
            sign = v;
            (v < 0.0 ? neg : pos) = i;
        }
        if (count == 1) {
            s["dofs"] = std::vector<std::size_t>{sign < 0.0 ? neg : pos};
            s["sign"] = sign;
        } else {
            s["dofs"] = std::vector<std::size_t>{neg, pos};
        }
        s["E"] = model.linear_stiffness[j];
        s["Eprime"] = model.unilateral_stiffness[j];
        s["d"] = model.gaps[j];
        springs.push_back(std::move(s));
    }
    doc["springs"] = std::move(springs);
    doc["epsilon"] = model.epsilon;
    return doc.dump(2) + "\n";
}

} // namespace nnm
