#include "nnm/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace nnm {

namespace {

class Writer {
public:
    Writer() { out_ << "{\n"; }

    Writer& number(const char* key, double v) {
        field(key) << format_double(v);
        return *this;
    }
    Writer& integer(const char* key, long long v) {
        field(key) << v;
        return *this;
    }
    Writer& boolean(const char* key, bool v) {
        field(key) << (v ? "true" : "false");
        return *this;
    }
    Writer& text(const char* key, const std::string& v) {
        // nlohmann handles the escaping.
        field(key) << nlohmann::json(v).dump();
        return *this;
    }
    Writer& array(const char* key, std::span<const double> v) {
        auto& o = field(key);
        o << '[';
        for (std::size_t i = 0; i < v.size(); ++i) o << (i ? ", " : "") << format_double(v[i]);
        o << ']';
        return *this;
    }
    Writer& strings(const char* key, const std::vector<std::string>& v) {
        field(key) << nlohmann::json(v).dump();
        return *this;
    }

    std::string str() {
        out_ << "\n}\n";
        return out_.str();
    }

private:
    std::ostringstream& field(const char* key) {
        if (!first_) out_ << ",\n";
        first_ = false;
        out_ << "  \"" << key << "\": ";
        return out_;
    }

    std::ostringstream out_;
    bool first_ = true;
};

} // namespace

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string periodic_json(const PeriodicSolution& sol) {
    const ShootingParams& p = sol.params;
    Vector a, b;
    for (std::size_t j = 0; j < p.modes(); ++j) {
        a.push_back(p.a(j));
        b.push_back(p.b(j));
    }
    Writer w;
    w.number("a1", p.a1)
        .number("eps", p.eps)
        .number("eta", p.eta())
        .array("b", b)
        .array("a", a)
        .number("omega_eps", sol.omega_eps)
        .number("period", sol.period)
        .number("residual", sol.residual)
        .integer("iterations", static_cast<long long>(sol.report.iterations()))
        .array("ratios", sol.report.ratios);
    if (!sol.warnings.empty()) w.strings("warnings", sol.warnings);
    return w.str();
}

std::string static_json(const StaticSolution& sol, double epsilon) {
    return Writer()
        .number("eps", epsilon)
        .array("x", sol.x)
        .boolean("converged", sol.report.converged)
        .number("residual", sol.report.residual)
        .integer("iterations", static_cast<long long>(sol.report.iterations()))
        .array("steps", sol.report.iterates)
        .array("ratios", sol.report.ratios)
        .number("measured_contraction", sol.report.measured_contraction)
        .number("condition", sol.condition)
        .str();
}

std::string error_json(const Error& err) {
    return Writer().text("error", std::string(to_string(err.code()))).text("message", err.what()).str();
}

} // namespace nnm
