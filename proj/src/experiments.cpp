#include "nmv/experiments.hpp"

#include "nmv/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

namespace nmv {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double param(const ModelSpec& m, const std::string& key) {
    const auto it = m.params.find(key);
    if (it == m.params.end()) throw ConfigError("param." + key, "model '" + m.name + "' has no such parameter");
    return std::stod(it->second);
}

nlohmann::json snaps_echo(const TimeGrid& g) {
    nlohmann::json s = nlohmann::json::array();
    for (const auto& x : g.snaps())
        s.push_back({{"lag", x.lag}, {"requested", x.requested.str()}, {"used", x.used.str()}, {"distance", x.distance}});
    return s;
}

double pow_norm(std::span<const double> x, std::span<const double> y, double p) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
    return std::pow(std::sqrt(s), p);
}

} // namespace

nlohmann::json model_echo(const ModelSpec& model) {
    nlohmann::json lags = nlohmann::json::array();
    for (const auto& l : model.lags) lags.push_back(l.str());
    return {{"name", model.name},
            {"params", model.params},
            {"lags", lags},
            {"dim_state", model.dim_state},
            {"dim_noise", model.dim_noise}};
}

nlohmann::json grid_echo(const TimeGrid& grid) {
    return {{"delta", grid.delta().str()},
            {"T", grid.horizon().str()},
            {"M", grid.big_m()},
            {"M_T", grid.big_mt()},
            {"lag_offsets", std::vector<std::int64_t>(grid.lag_offsets().begin(), grid.lag_offsets().end())},
            {"snaps", snaps_echo(grid)}};
}

ExperimentReport convergence_study(const ModelSpec& model, const ConvergenceOptions& opt) {
    const TamingConfig taming{opt.gamma, opt.tamed};
    taming.validate();
    if (opt.n_particles == 0) throw ConfigError("N", "need at least one particle");
    if (opt.level_exponents.size() < 3)
        throw SlopeUndefined("convergence study needs at least 3 comparison levels");
    for (int e : opt.level_exponents)
        if (e < 1 || e >= opt.finest_exponent)
            throw ConfigError("levels", "every level must be coarser than the reference 2^-" +
                                            std::to_string(opt.finest_exponent) + " and finer than 1");
    if (opt.finest_exponent > 30) throw ConfigError("finest", "reference exponent above 30");

    ExperimentReport rep;
    rep.kind = "convergence";
    rep.columns = {"level_exponent", "delta", "err", "wall_ms"};
    rep.config = {{"model", model_echo(model)},
                  {"T", opt.horizon.str()},
                  {"gamma", opt.gamma},
                  {"tamed", opt.tamed},
                  {"N", opt.n_particles},
                  {"finest_exponent", opt.finest_exponent},
                  {"level_exponents", opt.level_exponents},
                  {"seed", opt.seed},
                  {"snap", opt.snap}};

    SimulationOptions sim;
    sim.workers = opt.workers;

    const auto t_ref = Clock::now();
    const TimeGrid ref_grid = build_grid(model.lags, opt.horizon, dyadic(opt.finest_exponent), opt.snap);
    const Trajectory ref = simulate(model, ref_grid, taming, opt.n_particles, opt.seed, sim);
    rep.config["reference_grid"] = grid_echo(ref_grid);
    rep.annotations["reference_wall_ms"] = elapsed_ms(t_ref);

    nlohmann::json level_grids = nlohmann::json::array();
    std::vector<std::pair<double, double>> pts;
    bool positive = true;
    for (int e : opt.level_exponents) {
        const auto t0 = Clock::now();
        const TimeGrid grid = build_grid(model.lags, opt.horizon, dyadic(e), opt.snap);
        sim.ratio = std::int64_t{1} << (opt.finest_exponent - e);
        const Trajectory run = simulate(model, grid, taming, opt.n_particles, opt.seed, sim);

        std::vector<double> sq(opt.n_particles);
        const std::size_t d = model.dim_state;
        for (std::size_t i = 0; i < opt.n_particles; ++i) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = ref.terminal[i * d + c] - run.terminal[i * d + c];
                s += diff * diff;
            }
            sq[i] = s;
        }
        const double err = std::sqrt(pairwise_sum(sq, sq.size()) / static_cast<double>(opt.n_particles));
        const double delta = dyadic(e).to_double();
        rep.rows.push_back({static_cast<std::int64_t>(e), delta, err, 0.0});
        rep.wall_ms.push_back(elapsed_ms(t0));
        level_grids.push_back(grid_echo(grid));
        pts.emplace_back(delta, err);
        positive = positive && err > 0.0;
    }
    rep.config["level_grids"] = level_grids;
    rep.annotations["expected_slope"] = 0.5;
    if (positive)
        rep.fit = fit_slope(pts);
    else
        rep.notes.push_back("slope not fitted: some errors are exactly zero");
    if (!ref_grid.snaps().empty()) rep.notes.push_back("non-aligned delays were snapped to each level's grid");
    rep.assign_run_id();
    return rep;
}

ExperimentReport chaos_study(const ModelSpec& model, const ChaosOptions& opt) {
    const TamingConfig taming{opt.gamma, true};
    taming.validate();
    if (opt.probe_count == 0) throw ConfigError("probes", "probe_count must be positive");
    if (opt.n_list.empty()) throw ConfigError("n_list", "needs at least one particle count");
    if (!(opt.p >= 1.0)) throw ConfigError("p", "must be >= 1");
    const std::size_t n_min = *std::min_element(opt.n_list.begin(), opt.n_list.end());
    const std::size_t n_max = *std::max_element(opt.n_list.begin(), opt.n_list.end());
    if (opt.probe_count > n_min) throw ConfigError("probes", "probe_count exceeds the smallest N");
    if (opt.n_reference <= n_max) throw ConfigError("n_ref", "reference N must exceed every N in the list");

    const TimeGrid grid = build_grid(model.lags, opt.horizon, opt.delta, opt.snap);

    ExperimentReport rep;
    rep.kind = "chaos";
    rep.columns = {"n_particles", "proxy_error", "p", "wall_ms"};
    rep.config = {{"model", model_echo(model)},
                  {"T", opt.horizon.str()},
                  {"gamma", opt.gamma},
                  {"grid", grid_echo(grid)},
                  {"n_list", opt.n_list},
                  {"n_reference", opt.n_reference},
                  {"probe_count", opt.probe_count},
                  {"p", opt.p},
                  {"seed", opt.seed}};

    SimulationOptions sim;
    sim.workers = opt.workers;
    sim.trace_particles = opt.probe_count;
    const Trajectory ref = simulate(model, grid, taming, opt.n_reference, opt.seed, sim);

    std::vector<std::pair<double, double>> pts;
    bool positive = true;
    const std::size_t d = model.dim_state;
    for (std::size_t n : opt.n_list) {
        const auto t0 = Clock::now();
        const Trajectory run = simulate(model, grid, taming, n, opt.seed, sim);
        std::vector<double> per_probe(opt.probe_count);
        for (std::size_t i = 0; i < opt.probe_count; ++i) {
            const auto a = run.trace(i);
            const auto b = ref.trace(i);
            double worst = 0.0;
            for (std::int64_t k = 0; k <= grid.big_mt(); ++k) {
                const auto off = static_cast<std::size_t>(k) * d;
                worst = std::max(worst, pow_norm(a.subspan(off, d), b.subspan(off, d), opt.p));
            }
            per_probe[i] = worst;
        }
        const double proxy = pairwise_sum(per_probe, per_probe.size()) / static_cast<double>(opt.probe_count);
        rep.rows.push_back({static_cast<std::int64_t>(n), proxy, opt.p, 0.0});
        rep.wall_ms.push_back(elapsed_ms(t0));
        pts.emplace_back(static_cast<double>(n), proxy);
        positive = positive && proxy > 1e-300;
    }

    // Rates for E sup|Y^i - Y^{i,N}|^p: N^{-1/2} under a contractive neutral
    // term with bounded delay moduli; otherwise (N^{-1/2})^lambda with
    // lambda = ((p - eps)/p)^floor(T/rho), eps in (0, 1].
    const double d_half = static_cast<double>(d) / 2.0;
    const auto periods = static_cast<int>(std::floor((opt.horizon / model.rho()).to_double()));
    const double lambda_eps1 = std::pow((opt.p - 1.0) / opt.p, periods);
    rep.annotations["regime"] = opt.p > d_half ? "p > d/2" : (opt.p == d_half ? "p = d/2" : "p < d/2");
    rep.annotations["contractive_neutral"] = model.growth.neutral_contraction.has_value() &&
                                             *model.growth.neutral_contraction < 1.0;
    rep.annotations["expected_slope_strong_delay_conditions"] = -0.5;
    rep.annotations["expected_slope_eps_to_0"] = -0.5;
    rep.annotations["expected_slope_eps_1"] = -0.5 * lambda_eps1;
    rep.annotations["lambda_eps_1"] = lambda_eps1;
    if (positive && pts.size() >= 3)
        rep.fit = fit_slope(pts);
    else
        rep.notes.push_back("slope not fitted: fewer than 3 points or zero proxy error");
    rep.assign_run_id();
    return rep;
}

ExperimentReport moment_sweep(const ModelSpec& model, const MomentOptions& opt) {
    const TamingConfig taming{opt.gamma, opt.tamed};
    taming.validate();
    if (!(opt.p >= 2.0)) throw ConfigError("p", "moment order must be >= 2");
    if (opt.deltas.empty()) throw ConfigError("deltas", "needs at least one step size");
    if (opt.seeds.empty()) throw ConfigError("seeds", "needs at least one seed");

    ExperimentReport rep;
    rep.kind = "moments";
    rep.columns = {"delta", "p", "moment", "blowup_count"};
    nlohmann::json deltas = nlohmann::json::array();
    for (const auto& dl : opt.deltas) deltas.push_back(dl.str());
    rep.config = {{"model", model_echo(model)}, {"T", opt.horizon.str()}, {"gamma", opt.gamma},
                  {"tamed", opt.tamed},         {"deltas", deltas},         {"N", opt.n_particles},
                  {"p", opt.p},                 {"seeds", opt.seeds},       {"snap", opt.snap},
                  {"blowup_threshold", opt.blowup_threshold}};

    SimulationOptions sim;
    sim.workers = opt.workers;
    sim.track_sup = true;

    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& delta : opt.deltas) {
        const auto t0 = Clock::now();
        const TimeGrid grid = build_grid(model.lags, opt.horizon, delta, opt.snap);
        std::int64_t blowups = 0;
        std::vector<double> seed_means;
        nlohmann::json failures = nlohmann::json::array();
        for (auto seed : opt.seeds) {
            try {
                const Trajectory run = simulate(model, grid, taming, opt.n_particles, seed, sim);
                std::vector<double> terms(opt.n_particles);
                double worst = 0.0;
                for (std::size_t i = 0; i < opt.n_particles; ++i) {
                    terms[i] = std::pow(run.sup_norm[i], opt.p);
                    worst = std::max(worst, run.sup_norm[i]);
                }
                if (worst > opt.blowup_threshold) {
                    ++blowups;
                    failures.push_back({{"seed", seed}, {"reason", "threshold"}, {"max_abs", worst}});
                }
                seed_means.push_back(pairwise_sum(terms, terms.size()) / static_cast<double>(opt.n_particles));
            } catch (const NonFiniteState& e) {
                ++blowups;
                failures.push_back({{"seed", seed}, {"reason", e.what()}});
            }
        }
        const double moment = seed_means.empty()
                                  ? std::numeric_limits<double>::infinity()
                                  : pairwise_sum(seed_means, seed_means.size()) / static_cast<double>(seed_means.size());
        rep.rows.push_back({delta.to_double(), opt.p, moment, blowups});
        rep.wall_ms.push_back(elapsed_ms(t0));
        rep.row_extras.push_back({{"delta_exact", delta.str()},
                                  {"finite_runs", seed_means.size()},
                                  {"failures", failures}});
        if (std::isfinite(moment)) {
            lo = std::min(lo, moment);
            hi = std::max(hi, moment);
        }
    }
    if (hi > 0.0 && std::isfinite(lo) && lo > 0.0) rep.annotations["moment_ratio"] = hi / lo;
    rep.assign_run_id();
    return rep;
}

double linear_mean_ode(const ModelSpec& linear, const Rational& horizon, const Rational& h) {
    if (linear.name != "linear") throw ConfigError("model", "mean-field ODE oracle needs the linear model");
    const double kappa = param(linear, "kappa"), a = param(linear, "a"), b = param(linear, "b"),
                 c = param(linear, "c"), xi0 = param(linear, "xi0");
    const TimeGrid g = build_grid(linear.lags, horizon, h, false);
    const std::int64_t big_m = g.big_m(), steps = g.big_mt();
    const std::int64_t k2 = g.lag_offsets()[1], k3 = g.lag_offsets()[2];
    const double hd = h.to_double();

    // m[n + big_m] holds m(t_n), n >= -big_m
    std::vector<double> m(static_cast<std::size_t>(big_m + steps + 1), xi0);
    auto at = [&](std::int64_t n) -> double& { return m[static_cast<std::size_t>(n + big_m)]; };
    double w = at(0) - kappa * at(-big_m);
    for (std::int64_t n = 0; n < steps; ++n) {
        w += hd * (a * at(n) + b * at(n - k2) + c * at(n - k3));
        at(n + 1) = w + kappa * at(n + 1 - big_m);
    }
    return at(steps);
}

ExperimentReport meanfield_oracle(const ParamMap& linear_params, const OracleOptions& opt) {
    const ModelSpec model = builtin("linear", linear_params);
    const TamingConfig taming{opt.gamma, true};
    taming.validate();
    if (opt.n_particles < 2) throw ConfigError("N", "oracle needs at least two particles");
    if (opt.ode_substeps < 1) throw ConfigError("ode_substeps", "must be positive");
    if (!(Rational(2) * opt.delta < Rational(1))) throw ConfigError("delta", "oracle also runs at 2*delta, which must be < 1");

    const TimeGrid grid = build_grid(model.lags, opt.horizon, opt.delta, false);
    const TimeGrid coarse = build_grid(model.lags, opt.horizon, Rational(2) * opt.delta, false);

    ExperimentReport rep;
    rep.kind = "oracle";
    rep.columns = {"mean_particle", "mean_ode", "gap", "band"};
    rep.config = {{"model", model_echo(model)}, {"T", opt.horizon.str()},  {"gamma", opt.gamma},
                  {"delta", opt.delta.str()},   {"N", opt.n_particles},    {"seed", opt.seed},
                  {"ode_substeps", opt.ode_substeps}};

    const auto t0 = Clock::now();
    SimulationOptions sim;
    sim.workers = opt.workers;
    const Trajectory fine = simulate(model, grid, taming, opt.n_particles, opt.seed, sim);
    sim.ratio = 2;
    const Trajectory rough = simulate(model, coarse, taming, opt.n_particles, opt.seed, sim);

    const double n = static_cast<double>(opt.n_particles);
    const double mean_fine = pairwise_sum(fine.terminal, opt.n_particles) / n;
    const double mean_rough = pairwise_sum(rough.terminal, opt.n_particles) / n;
    std::vector<double> dev(opt.n_particles);
    for (std::size_t i = 0; i < opt.n_particles; ++i) dev[i] = (fine.terminal[i] - mean_fine) * (fine.terminal[i] - mean_fine);
    const double sd = std::sqrt(pairwise_sum(dev, dev.size()) / (n - 1.0));
    const double band = 3.0 * sd / std::sqrt(n);

    const double ode = linear_mean_ode(model, opt.horizon, opt.delta / Rational(opt.ode_substeps));
    const double gap = std::abs(mean_fine - ode);

    // Discretisation bias e(D) ~ C sqrt(D), estimated from the coupled runs at D and 2D.
    const double sqrt_d = std::sqrt(opt.delta.to_double());
    const double c_delta = std::abs((mean_rough - ode) - (mean_fine - ode)) / ((std::sqrt(2.0) - 1.0) * sqrt_d);
    const double tolerance = band + c_delta * sqrt_d;
    const bool passed = gap <= tolerance;

    rep.rows.push_back({mean_fine, ode, gap, band});
    rep.wall_ms.push_back(elapsed_ms(t0));
    rep.row_extras.push_back({{"mean_particle_2delta", mean_rough}, {"sample_sd", sd}});
    rep.annotations = {{"c_delta", c_delta}, {"tolerance", tolerance}, {"passed", passed}};
    rep.assign_run_id();
    if (opt.enforce && !passed)
        throw OracleMismatch("particle mean " + format_real(mean_fine) + " misses ODE mean " + format_real(ode) +
                             " by " + format_real(gap) + " > " + format_real(tolerance));
    return rep;
}

ExperimentReport simulation_report(const ModelSpec& model, const TimeGrid& grid, const TamingConfig& taming,
                                   std::size_t n_particles, std::uint64_t seed, const SimulationOptions& options) {
    ExperimentReport rep;
    rep.kind = "simulate";
    rep.columns = {"particle", "component", "time", "value"};
    std::vector<std::int64_t> snaps = options.snapshot_steps;
    rep.config = {{"model", model_echo(model)}, {"grid", grid_echo(grid)}, {"gamma", taming.gamma},
                  {"tamed", taming.tamed},      {"N", n_particles},        {"seed", seed},
                  {"ratio", options.ratio},     {"snapshot_steps", snaps}};
    rep.assign_run_id();

    const auto t0 = Clock::now();
    SimulationOptions sim = options;
    if (std::find(snaps.begin(), snaps.end(), grid.big_mt()) == snaps.end()) sim.snapshot_steps.push_back(grid.big_mt());
    const Trajectory run = simulate(model, grid, taming, n_particles, seed, sim);
    const double ms = elapsed_ms(t0);

    const std::size_t d = model.dim_state;
    for (const auto& s : run.snapshots)
        for (std::size_t i = 0; i < n_particles; ++i)
            for (std::size_t c = 0; c < d; ++c) {
                rep.rows.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(c), s.time,
                                    s.values[i * d + c]});
            }
    double sum = 0.0, sum_sq = 0.0;
    for (double x : run.terminal) {
        sum += x;
        sum_sq += x * x;
    }
    const double cnt = static_cast<double>(run.terminal.size());
    rep.annotations = {{"terminal_mean", sum / cnt}, {"terminal_second_moment", sum_sq / cnt}, {"wall_ms", ms}};
    rep.notes = run.warnings;
    return rep;
}

} // namespace nmv
