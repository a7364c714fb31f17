#pragma once

#include "nmv/model.hpp"
#include "nmv/rational.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace nmv::cli {

inline constexpr const char* kOutputDirEnv = "NMV_OUTPUT_DIR";

/// Validated command line. Unset optionals fall back to the experiment
/// defaults of the chosen subcommand.
struct RunConfig {
    std::string subcommand;
    std::optional<std::string> model; // default: example1, or linear for chaos / oracle-mean
    ParamMap params;
    std::optional<Rational> horizon;
    std::optional<Rational> delta;
    double gamma = 0.5;
    bool tamed = true;
    std::optional<std::size_t> n_particles;
    std::uint64_t seed = 1;
    std::optional<bool> snap; // default: the model's own preference
    std::string out_dir = ".";
    int workers = 1;
    bool timings = false;

    std::vector<Rational> snapshots; // simulate: extra output times

    std::optional<int> finest;       // convergence
    std::vector<int> levels;         // convergence, exponents
    std::vector<std::size_t> n_list; // chaos, fg-rate
    std::optional<std::size_t> n_ref;
    std::optional<std::size_t> probes;
    std::optional<double> p;
    std::vector<Rational> deltas;      // moments
    std::vector<std::uint64_t> seeds;  // moments
    std::string sampler = "normal";    // fg-rate
    std::optional<std::size_t> replications;

    nlohmann::json to_json() const;
};

/// Parses argv (without the program name). Throws nmv::ConfigError naming
/// the offending field. Values from --config are overridden by flags.
RunConfig parse(const std::vector<std::string>& args);

/// Runs the configured experiment, writes <out>/<run_id>.csv and
/// <out>/<run_id>.jsonl and prints a one-line summary to `out`.
/// Returns 0 on success, 1 on runtime failure.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse + run with exit codes 0 / 1 / 2 (2 = configuration error).
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace nmv::cli
