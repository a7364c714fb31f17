#pragma once

#include "nmv/empirical.hpp"
#include "nmv/grid.hpp"
#include "nmv/model.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace nmv {

struct TamingConfig {
    double gamma = 0.5;
    bool tamed = true; // false: classical Euler-Maruyama, for divergence demonstrations

    /// Throws ConfigError("gamma") unless 0 < gamma <= 1/2 when tamed.
    void validate() const;
};

/// alpha / (1 + delta^gamma |alpha|).
std::vector<double> tame_drift(std::span<const double> alpha, const Rational& delta, double gamma);
std::vector<double> tame_drift(std::span<const double> alpha, double delta, double gamma);

/// Brownian driving of one run: each scheme step consumes `ratio`
/// consecutive fine increments of size fine_delta = delta / ratio.
struct NoiseContext {
    std::uint64_t seed = 0;
    std::int64_t ratio = 1;
    std::span<const std::uint32_t> keys; // noise key of each particle; empty = its index

    std::uint32_t key_of(std::size_t particle) const {
        return keys.empty() ? static_cast<std::uint32_t>(particle) : keys[particle];
    }
};

/// N particle histories on a delay-aligned grid plus the neutral values
/// Z_i(k) = X_i(t_k) - D(X_i(t_{k-M})).
///
/// Histories are a ring of M+2 time slots, each slot a point-major column of
/// all particles, so every lagged column is a contiguous EmpiricalView.
/// Column statistics are computed once when a slot is written.
class ParticleEnsemble {
public:
    /// Fills t_{-M}..t_0 with the initial path (plus the per-particle offset
    /// when the model has an initial spread) and sets Z_i(0). `keys` maps
    /// particles to noise keys as in NoiseContext.
    ParticleEnsemble(const ModelSpec& model, const TimeGrid& grid, std::size_t n_particles, std::uint64_t seed,
                     std::span<const std::uint32_t> keys = {});

    std::size_t size() const noexcept { return n_; }
    std::size_t dim() const noexcept { return d_; }
    std::int64_t step() const noexcept { return step_; }
    const TimeGrid& grid() const noexcept { return grid_; }

    /// Valid for step() - M <= k <= step().
    std::span<const double> column(std::int64_t k) const;
    std::span<const double> state(std::size_t particle, std::int64_t k) const;
    EmpiricalView view(std::int64_t k) const;
    std::span<const double> neutral_state(std::size_t particle) const;

    /// Largest |X_i(t_k) - D(X_i(t_{k-M})) - Z_i(k)| at the current step,
    /// relative to max(1, |X|, |D|, |Z|).
    double audit_neutral(const ModelSpec& model) const;

private:
    friend void step(ParticleEnsemble&, const ModelSpec&, const TamingConfig&, const NoiseContext&, int);

    std::size_t slot(std::int64_t k) const;
    std::span<double> mutable_column(std::int64_t k);
    void refresh_statistics(std::int64_t k);

    TimeGrid grid_;
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::size_t depth_ = 0;
    std::int64_t step_ = 0;
    std::vector<double> history_;   // depth * N * d
    std::vector<double> slot_mean_; // depth * d
    std::vector<double> slot_m2_;   // depth
    std::vector<double> z_;         // N * d
};

/// Advance the ensemble from t_k to t_{k+1}. Particles are split across
/// `workers` threads (0 = all available); results do not depend on it.
/// Throws NonFiniteState for the lowest-indexed failing particle; the
/// ensemble must be discarded afterwards.
void step(ParticleEnsemble& ensemble, const ModelSpec& model, const TamingConfig& taming, const NoiseContext& noise,
          int workers = 1);

struct SimulationOptions {
    int workers = 1;
    std::int64_t ratio = 1;
    std::vector<std::int64_t> snapshot_steps;
    std::size_t trace_particles = 0; // record every grid value of the first P particles
    bool track_sup = false;          // per-particle max_k |X_i(t_k)|, 0 <= k <= M_T
    std::int64_t audit_every = 0;    // neutral bookkeeping audit period, 0 = off
    std::vector<std::uint32_t> noise_keys; // optional particle -> noise key relabelling (size N)
};

struct Snapshot {
    std::int64_t step = 0;
    double time = 0.0;
    std::vector<double> values; // N * d
};

struct Trajectory {
    std::size_t n_particles = 0;
    std::size_t dim = 0;
    std::int64_t steps = 0;
    std::vector<double> terminal; // X_i(T), N * d
    std::vector<Snapshot> snapshots;
    std::vector<double> traces; // P * (M_T + 1) * d, particle-major
    std::vector<double> sup_norm;
    double max_audit_error = 0.0;
    std::vector<std::string> warnings;

    std::span<const double> trace(std::size_t particle) const {
        const auto len = static_cast<std::size_t>(steps + 1) * dim;
        return std::span<const double>(traces).subspan(particle * len, len);
    }
};

/// init + M_T steps of the tamed (or classical) scheme for the interacting
/// particle system. Bitwise reproducible for fixed (seed, ratio, grid).
Trajectory simulate(const ModelSpec& model, const TimeGrid& grid, const TamingConfig& taming,
                    std::size_t n_particles, std::uint64_t seed, const SimulationOptions& options = {});

} // namespace nmv
