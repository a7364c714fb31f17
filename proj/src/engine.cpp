#include "nmv/engine.hpp"

#include "nmv/errors.hpp"
#include "nmv/noise.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nmv {

void TamingConfig::validate() const {
    if (tamed && !(gamma > 0.0 && gamma <= 0.5))
        throw ConfigError("gamma", "taming exponent must lie in (0, 1/2], got " + std::to_string(gamma));
}

std::vector<double> tame_drift(std::span<const double> alpha, double delta, double gamma) {
    double norm = 0.0;
    for (double a : alpha) norm += a * a;
    norm = std::sqrt(norm);
    const double scale = 1.0 / (1.0 + std::pow(delta, gamma) * norm);
    std::vector<double> out(alpha.begin(), alpha.end());
    for (auto& a : out) a *= scale;
    return out;
}

std::vector<double> tame_drift(std::span<const double> alpha, const Rational& delta, double gamma) {
    return tame_drift(alpha, delta.to_double(), gamma);
}

ParticleEnsemble::ParticleEnsemble(const ModelSpec& model, const TimeGrid& grid, std::size_t n_particles,
                                   std::uint64_t seed, std::span<const std::uint32_t> keys)
    : grid_(grid), n_(n_particles), d_(model.dim_state) {
    if (n_particles == 0) throw ConfigError("N", "need at least one particle");
    if (!keys.empty() && keys.size() != n_particles) throw ConfigError("noise_keys", "need one key per particle");
    if (grid.lag_count() != model.lag_count()) throw ConfigError("lags", "grid and model disagree on the lag count");

    const std::int64_t m = grid.big_m();
    depth_ = static_cast<std::size_t>(m) + 2;
    history_.assign(depth_ * n_ * d_, 0.0);
    slot_mean_.assign(depth_ * d_, 0.0);
    slot_m2_.assign(depth_, 0.0);
    z_.assign(n_ * d_, 0.0);

    std::vector<double> offset(n_ * d_, 0.0);
    if (model.initial_spread > 0.0)
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t c = 0; c < d_; ++c)
                offset[i * d_ + c] = model.initial_spread *
                                     standard_normal({seed, keys.empty() ? static_cast<std::uint32_t>(i) : keys[i],
                                                      noise_stream::initial_offset,
                                                      static_cast<std::uint32_t>(c)});

    std::vector<double> xi(d_);
    for (std::int64_t k = -m; k <= 0; ++k) {
        model.initial_path(grid.time(k), xi);
        auto col = mutable_column(k);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t c = 0; c < d_; ++c) col[i * d_ + c] = xi[c] + offset[i * d_ + c];
        refresh_statistics(k);
    }

    std::vector<double> dval(d_);
    for (std::size_t i = 0; i < n_; ++i) {
        model.neutral(state(i, -m), dval);
        const auto x0 = state(i, 0);
        for (std::size_t c = 0; c < d_; ++c) z_[i * d_ + c] = x0[c] - dval[c];
    }
}

std::size_t ParticleEnsemble::slot(std::int64_t k) const {
    const auto depth = static_cast<std::int64_t>(depth_);
    return static_cast<std::size_t>(((k % depth) + depth) % depth);
}

std::span<const double> ParticleEnsemble::column(std::int64_t k) const {
    return std::span<const double>(history_).subspan(slot(k) * n_ * d_, n_ * d_);
}

std::span<double> ParticleEnsemble::mutable_column(std::int64_t k) {
    return std::span<double>(history_).subspan(slot(k) * n_ * d_, n_ * d_);
}

std::span<const double> ParticleEnsemble::state(std::size_t particle, std::int64_t k) const {
    return column(k).subspan(particle * d_, d_);
}

std::span<const double> ParticleEnsemble::neutral_state(std::size_t particle) const {
    return std::span<const double>(z_).subspan(particle * d_, d_);
}

EmpiricalView ParticleEnsemble::view(std::int64_t k) const {
    const std::size_t s = slot(k);
    std::vector<double> mean(slot_mean_.begin() + static_cast<std::ptrdiff_t>(s * d_),
                             slot_mean_.begin() + static_cast<std::ptrdiff_t>((s + 1) * d_));
    return EmpiricalView(column(k), d_, std::move(mean), slot_m2_[s]);
}

void ParticleEnsemble::refresh_statistics(std::int64_t k) {
    const std::size_t s = slot(k);
    std::vector<double> mean;
    double m2 = 0.0;
    EmpiricalView::statistics(column(k), d_, mean, m2);
    std::copy(mean.begin(), mean.end(), slot_mean_.begin() + static_cast<std::ptrdiff_t>(s * d_));
    slot_m2_[s] = m2;
}

double ParticleEnsemble::audit_neutral(const ModelSpec& model) const {
    std::vector<double> dval(d_);
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        model.neutral(state(i, step_ - grid_.big_m()), dval);
        const auto x = state(i, step_);
        for (std::size_t c = 0; c < d_; ++c) {
            const double z = z_[i * d_ + c];
            const double scale = std::max({1.0, std::abs(x[c]), std::abs(dval[c]), std::abs(z)});
            worst = std::max(worst, std::abs(x[c] - dval[c] - z) / scale);
        }
    }
    return worst;
}

namespace {

int resolve_workers(int workers) {
#ifdef _OPENMP
    return workers > 0 ? workers : omp_get_max_threads();
#else
    (void)workers;
    return 1;
#endif
}

enum class Failure : unsigned char { none, drift, diffusion, state };

const char* failure_name(Failure f) {
    switch (f) {
    case Failure::drift: return "drift";
    case Failure::diffusion: return "diffusion";
    case Failure::state: return "state";
    default: return "value";
    }
}

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace

void step(ParticleEnsemble& ens, const ModelSpec& model, const TamingConfig& taming, const NoiseContext& noise,
          int workers) {
    const TimeGrid& grid = ens.grid_;
    const std::int64_t k = ens.step_;
    if (k >= grid.big_mt()) throw ConfigError("step", "ensemble already reached the horizon");
    if (noise.ratio < 1) throw ConfigError("ratio", "noise ratio must be >= 1");
    if (!noise.keys.empty() && noise.keys.size() != ens.n_) throw ConfigError("noise_keys", "need one key per particle");

    const std::size_t n = ens.n_, d = ens.d_, m = model.dim_noise, r = model.lag_count();
    const double delta = grid.delta().to_double();
    const double delta_gamma = std::pow(delta, taming.gamma);
    const double sqrt_fine = std::sqrt(delta / static_cast<double>(noise.ratio));
    const std::int64_t big_m = grid.big_m();

    std::vector<EmpiricalView> views;
    views.reserve(r);
    for (std::size_t v = 0; v < r; ++v) views.push_back(ens.view(grid.lag_index(k, v)));

    std::vector<Failure> failed(n, Failure::none);
    const auto next = ens.mutable_column(k + 1);
    const auto offsets = grid.lag_offsets();

#pragma omp parallel num_threads(resolve_workers(workers))
    {
        std::vector<double> states(r * d), a(d), b(d * m), db(m), dval(d);
#pragma omp for schedule(static)
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t v = 0; v < r; ++v) {
                const auto s = ens.state(i, k - offsets[v]);
                std::copy(s.begin(), s.end(), states.begin() + static_cast<std::ptrdiff_t>(v * d));
            }
            const LagInputs in{states, views, d};
            model.drift(in, a);
            if (!all_finite(a)) {
                failed[i] = Failure::drift;
                continue;
            }
            if (taming.tamed) {
                double norm = 0.0;
                for (double x : a) norm += x * x;
                const double scale = 1.0 / (1.0 + delta_gamma * std::sqrt(norm));
                for (auto& x : a) x *= scale;
            }
            model.diffusion(in, b);
            if (!all_finite(b)) {
                failed[i] = Failure::diffusion;
                continue;
            }
            for (std::size_t j = 0; j < m; ++j)
                db[j] = coarse_increment(noise.seed, noise.key_of(i), static_cast<std::uint32_t>(j), k,
                                         noise.ratio, sqrt_fine);

            double* z = ens.z_.data() + i * d;
            for (std::size_t c = 0; c < d; ++c) {
                double inc = a[c] * delta;
                for (std::size_t j = 0; j < m; ++j) inc += b[c * m + j] * db[j];
                z[c] += inc;
            }
            model.neutral(ens.state(i, k + 1 - big_m), dval);
            double* x = next.data() + i * d;
            for (std::size_t c = 0; c < d; ++c) x[c] = z[c] + dval[c];
            if (!all_finite(std::span<const double>(x, d)) || !all_finite(std::span<const double>(z, d)))
                failed[i] = Failure::state;
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        if (failed[i] != Failure::none) throw NonFiniteState(i, k, failure_name(failed[i]));

    ens.refresh_statistics(k + 1);
    ens.step_ = k + 1;
}

Trajectory simulate(const ModelSpec& model, const TimeGrid& grid, const TamingConfig& taming,
                    std::size_t n_particles, std::uint64_t seed, const SimulationOptions& options) {
    taming.validate();
    if (options.ratio < 1) throw ConfigError("ratio", "noise ratio must be >= 1");
    if (options.trace_particles > n_particles) throw ConfigError("trace_particles", "more traced than simulated particles");

    ParticleEnsemble ens(model, grid, n_particles, seed, options.noise_keys);
    const NoiseContext noise{seed, options.ratio, options.noise_keys};
    const std::int64_t mt = grid.big_mt();
    const std::size_t d = model.dim_state;

    Trajectory out;
    out.n_particles = n_particles;
    out.dim = d;
    out.steps = mt;
    if (n_particles == 1) out.warnings.push_back("N = 1: empirical measures reduce to the particle itself");
    for (const auto& s : grid.snaps())
        out.warnings.push_back("delay " + s.requested.str() + " snapped to " + s.used.str());

    std::vector<std::int64_t> snaps = options.snapshot_steps;
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
    for (auto s : snaps)
        if (s < 0 || s > mt) throw ConfigError("snapshot_steps", "snapshot outside [0, M_T]");
    auto next_snap = snaps.begin();

    const std::size_t trace_len = static_cast<std::size_t>(mt + 1) * d;
    out.traces.assign(options.trace_particles * trace_len, 0.0);
    if (options.track_sup) out.sup_norm.assign(n_particles, 0.0);

    auto record = [&](std::int64_t k) {
        const auto col = ens.column(k);
        for (std::size_t i = 0; i < options.trace_particles; ++i)
            std::copy_n(col.begin() + static_cast<std::ptrdiff_t>(i * d), d,
                        out.traces.begin() + static_cast<std::ptrdiff_t>(i * trace_len + static_cast<std::size_t>(k) * d));
        if (options.track_sup)
            for (std::size_t i = 0; i < n_particles; ++i) {
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) s += col[i * d + c] * col[i * d + c];
                out.sup_norm[i] = std::max(out.sup_norm[i], std::sqrt(s));
            }
        if (next_snap != snaps.end() && *next_snap == k) {
            out.snapshots.push_back({k, grid.time(k), std::vector<double>(col.begin(), col.end())});
            ++next_snap;
        }
        if (options.audit_every > 0 && k % options.audit_every == 0)
            out.max_audit_error = std::max(out.max_audit_error, ens.audit_neutral(model));
    };

    record(0);
    for (std::int64_t k = 0; k < mt; ++k) {
        step(ens, model, taming, noise, options.workers);
        record(k + 1);
    }
    const auto last = ens.column(mt);
    out.terminal.assign(last.begin(), last.end());
    return out;
}

} // namespace nmv
