#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nnm::cli {

struct RunConfig {
    std::string command; // static, modes, periodic, sweep, oracle
    std::string model_path;
    std::string output_dir = ".";
    double tol = 1e-10;
    std::size_t grid = 2048;
    std::optional<double> eps;    // falls back to the model's epsilon
    std::optional<double> eps_to; // sweep end
    int eps_steps = 5;
    double a1 = 1.0;
    std::optional<double> alpha;
    std::optional<double> lambda;
    std::string method = "quasi";
    bool cold_start = false;
    unsigned seed = 0;
    std::vector<double> load; // static load, one entry per dof or a single broadcast value
    double omega = 1.0;       // oracle
};

enum Exit { Ok = 0, SolverError = 1, ConfigError = 2 };

/// Checks the config against the invariants that do not need the model.
/// Returns an empty string when valid.
std::string validate(const RunConfig& cfg);

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv (subcommand first) and runs it.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace nnm::cli
