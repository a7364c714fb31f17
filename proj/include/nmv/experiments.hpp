#pragma once

#include "nmv/engine.hpp"
#include "nmv/grid.hpp"
#include "nmv/model.hpp"
#include "nmv/rational.hpp"
#include "nmv/report.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nmv {

/// Strong error at T against a finer self-reference driven by the same
/// Brownian path: err = sqrt(1/N sum_i |X_ref^i(T) - X_level^i(T)|^2).
struct ConvergenceOptions {
    Rational horizon{4};
    double gamma = 0.5;
    bool tamed = true;
    std::size_t n_particles = 500;
    int finest_exponent = 13;
    std::vector<int> level_exponents{12, 11, 10, 9};
    std::uint64_t seed = 1;
    bool snap = true;
    int workers = 1;
};

ExperimentReport convergence_study(const ModelSpec& model, const ConvergenceOptions& options);

/// Particle-count error proxy: probe particles share noise and initial copies
/// across all N, and (1/P) sum_i max_k |X^{i,N}(t_k) - X^{i,N_ref}(t_k)|^p is
/// regressed on N.
struct ChaosOptions {
    Rational horizon{2};
    double gamma = 0.5;
    Rational delta = dyadic(6);
    std::vector<std::size_t> n_list{64, 128, 256, 512, 1024};
    std::size_t n_reference = 4096;
    std::size_t probe_count = 64;
    double p = 2.0;
    std::uint64_t seed = 1;
    bool snap = false;
    int workers = 1;
};

ExperimentReport chaos_study(const ModelSpec& model, const ChaosOptions& options);

/// E max_k |X^i(t_k)|^p over particles and seeds, for each step size.
/// Runs that end in NonFiniteState or exceed `blowup_threshold` are counted;
/// only non-finite runs are left out of the moment.
struct MomentOptions {
    Rational horizon{4};
    double gamma = 0.5;
    bool tamed = true;
    std::vector<Rational> deltas;
    std::size_t n_particles = 200;
    double p = 2.0;
    std::vector<std::uint64_t> seeds;
    bool snap = true;
    int workers = 1;
    double blowup_threshold = 1e10;
};

ExperimentReport moment_sweep(const ModelSpec& model, const MomentOptions& options);

/// Compares the particle mean at T of the linear model with an Euler
/// integration of the neutral delay ODE for m(t) = E Y(t).
struct OracleOptions {
    Rational horizon{2};
    double gamma = 0.5;
    Rational delta = dyadic(10);
    std::size_t n_particles = 2000;
    std::uint64_t seed = 1;
    int ode_substeps = 64;
    int workers = 1;
    bool enforce = true; // throw OracleMismatch when the gap exceeds the tolerance
};

/// m(t) at the horizon for d[m - kappa m(t-rho)] = [a m + b m(t-rho2) + c m(t-rho3)] dt,
/// m = xi0 on [-rho, 0], explicit Euler with step h (lags must be multiples of h).
double linear_mean_ode(const ModelSpec& linear, const Rational& horizon, const Rational& h);

ExperimentReport meanfield_oracle(const ParamMap& linear_params, const OracleOptions& options);

/// Terminal (and optional snapshot) states as a long-format table:
/// particle, component, time, value.
ExperimentReport simulation_report(const ModelSpec& model, const TimeGrid& grid, const TamingConfig& taming,
                                   std::size_t n_particles, std::uint64_t seed, const SimulationOptions& options);

/// Configuration echo shared by all experiments.
nlohmann::json model_echo(const ModelSpec& model);
nlohmann::json grid_echo(const TimeGrid& grid);

} // namespace nmv
