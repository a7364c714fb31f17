#include "cli.hpp"

#include "nmv/engine.hpp"
#include "nmv/errors.hpp"
#include "nmv/experiments.hpp"
#include "nmv/grid.hpp"
#include "nmv/measure.hpp"
#include "nmv/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nmv::cli {

namespace {

const std::vector<std::string> kSubcommands{"simulate", "convergence", "chaos", "moments", "fg-rate", "oracle-mean"};

// Everything is collected as text so conversion errors can name their field.
struct RawArgs {
    std::string subcommand;
    std::string model, horizon, delta, gamma, n, seed, out, workers, finest, n_ref, probes, p, sampler,
        replications;
    std::vector<std::string> params, snapshots, levels, n_list, deltas, seeds;
    bool untamed = false;
    bool timings = false;
};

struct AppBundle {
    CLI::App app{"Tamed Euler-Maruyama particle simulator for neutral delay McKean-Vlasov equations", "nmv"};
    RawArgs raw;
    CLI::Option* snap_on = nullptr;
    CLI::Option* snap_off = nullptr;
};

std::unique_ptr<AppBundle> build_app() {
    auto b = std::make_unique<AppBundle>();
    auto& app = b->app;
    auto& r = b->raw;
    app.set_config("--config", "", "flat key = value file; command-line flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.add_option("command", r.subcommand, "simulate | convergence | chaos | moments | fg-rate | oracle-mean")
        ->required();

    app.add_option("--model", r.model, "example1 | example2 | linear");
    app.add_option("--param", r.params, "model parameter override key=value (repeatable)");
    app.add_option("-T,--horizon", r.horizon, "time horizon T (rational)");
    app.add_option("--delta", r.delta, "step size, e.g. 1/1024, 2^-10 or 0.05");
    app.add_option("--gamma", r.gamma, "taming exponent in (0, 1/2]");
    app.add_flag("--untamed", r.untamed, "classical Euler-Maruyama (divergence demonstrations)");
    app.add_option("-N,--particles", r.n, "number of particles");
    app.add_option("--seed", r.seed, "noise seed");
    b->snap_on = app.add_flag("--snap", "move non-aligned delays onto the grid");
    b->snap_off = app.add_flag("--no-snap", "reject non-aligned delays");
    b->snap_on->excludes(b->snap_off);
    app.add_option("--out", r.out, std::string("output directory (default $") + kOutputDirEnv + " or .)");
    app.add_option("--workers", r.workers, "worker threads, 0 = all available");
    app.add_flag("--timings", r.timings, "fill the wall_ms column of the CSV");

    app.add_option("--snapshots", r.snapshots, "simulate: extra output times")->delimiter(',');
    app.add_option("--finest", r.finest, "convergence: reference step 2^-finest");
    app.add_option("--levels", r.levels, "convergence: level exponents, e.g. 12,11,10,9")->delimiter(',');
    app.add_option("--n-list", r.n_list, "chaos / fg-rate: sample sizes")->delimiter(',');
    app.add_option("--n-ref", r.n_ref, "chaos: reference particle count");
    app.add_option("--probes", r.probes, "chaos: probe particle count");
    app.add_option("-p,--order", r.p, "moment / Wasserstein order");
    app.add_option("--deltas", r.deltas, "moments: step sizes")->delimiter(',');
    app.add_option("--seeds", r.seeds, "moments: seeds, list or range a:b")->delimiter(',');
    app.add_option("--sampler", r.sampler, "fg-rate: normal | uniform | point");
    app.add_option("--replications", r.replications, "fg-rate: replications per sample size");
    return b;
}

template <class T>
T parse_integer(const std::string& text, const std::string& field) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) throw ConfigError(field, "expected an integer, got '" + text + "'");
    return value;
}

double parse_real(const std::string& text, const std::string& field) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos == text.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(field, "expected a real number, got '" + text + "'");
}

Rational parse_rational(const std::string& text, const std::string& field) {
    try {
        return Rational::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(field, e.what());
    }
}

std::size_t parse_count(const std::string& text, const std::string& field) {
    if (!text.empty() && text.front() == '-') throw ConfigError(field, "must be positive, got " + text);
    const auto v = parse_integer<std::size_t>(text, field);
    if (v == 0) throw ConfigError(field, "must be positive");
    return v;
}

std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& items) {
    std::vector<std::uint64_t> out;
    for (const auto& item : items) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            out.push_back(parse_integer<std::uint64_t>(item, "seeds"));
            continue;
        }
        const auto lo = parse_integer<std::uint64_t>(item.substr(0, colon), "seeds");
        const auto hi = parse_integer<std::uint64_t>(item.substr(colon + 1), "seeds");
        if (hi < lo) throw ConfigError("seeds", "empty range " + item);
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
    return out;
}

std::string field_of(const CLI::Error& e) {
    // CLI11 messages mention the option as "--name"
    const std::string msg = e.what();
    const auto pos = msg.find("--");
    if (pos == std::string::npos) return "argv";
    auto end = msg.find_first_of(" :=,'\"", pos + 2);
    return msg.substr(pos + 2, end == std::string::npos ? std::string::npos : end - pos - 2);
}

RunConfig convert(const AppBundle& b) {
    const RawArgs& r = b.raw;
    RunConfig c;
    if (std::find(kSubcommands.begin(), kSubcommands.end(), r.subcommand) == kSubcommands.end())
        throw ConfigError("subcommand", "unknown subcommand '" + r.subcommand + "'");
    c.subcommand = r.subcommand;

    if (!r.model.empty()) {
        const auto names = builtin_names();
        if (std::find(names.begin(), names.end(), r.model) == names.end())
            throw ConfigError("model", "unknown model '" + r.model + "'");
        c.model = r.model;
    }
    for (const auto& kv : r.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("param", "expected key=value, got '" + kv + "'");
        c.params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (!r.horizon.empty()) {
        c.horizon = parse_rational(r.horizon, "T");
        if (*c.horizon <= Rational(0)) throw ConfigError("T", "horizon must be positive");
    }
    if (!r.delta.empty()) {
        c.delta = parse_rational(r.delta, "delta");
        if (!(Rational(0) < *c.delta && *c.delta < Rational(1)))
            throw ConfigError("delta", "step size must lie in (0, 1), got " + c.delta->str());
    }
    c.tamed = !r.untamed;
    if (!r.gamma.empty()) c.gamma = parse_real(r.gamma, "gamma");
    if (c.tamed && !(c.gamma > 0.0 && c.gamma <= 0.5))
        throw ConfigError("gamma", "taming exponent must lie in (0, 1/2], got " + r.gamma);
    if (!r.n.empty()) c.n_particles = parse_count(r.n, "N");
    if (!r.seed.empty()) c.seed = parse_integer<std::uint64_t>(r.seed, "seed");
    if (b.snap_on->count() > 0) c.snap = true;
    if (b.snap_off->count() > 0) c.snap = false;

    if (!r.out.empty()) c.out_dir = r.out;
    else if (const char* env = std::getenv(kOutputDirEnv); env && *env) c.out_dir = env;
    if (!r.workers.empty()) {
        c.workers = parse_integer<int>(r.workers, "workers");
        if (c.workers < 0) throw ConfigError("workers", "must be >= 0");
    }
    c.timings = r.timings;

    for (const auto& s : r.snapshots) c.snapshots.push_back(parse_rational(s, "snapshots"));
    if (!r.finest.empty()) c.finest = parse_integer<int>(r.finest, "finest");
    for (const auto& s : r.levels) c.levels.push_back(parse_integer<int>(s, "levels"));
    for (const auto& s : r.n_list) c.n_list.push_back(parse_count(s, "n_list"));
    if (!r.n_ref.empty()) c.n_ref = parse_count(r.n_ref, "n_ref");
    if (!r.probes.empty()) c.probes = parse_integer<std::size_t>(r.probes, "probes");
    if (!r.p.empty()) {
        c.p = parse_real(r.p, "p");
        if (!(*c.p >= 1.0)) throw ConfigError("p", "order must be >= 1");
    }
    for (const auto& s : r.deltas) {
        const Rational d = parse_rational(s, "deltas");
        if (!(Rational(0) < d && d < Rational(1))) throw ConfigError("deltas", "step size must lie in (0, 1)");
        c.deltas.push_back(d);
    }
    c.seeds = parse_seeds(r.seeds);
    if (!r.sampler.empty()) {
        try {
            c.sampler = to_string(parse_sampler(r.sampler));
        } catch (const std::exception& e) {
            throw ConfigError("sampler", e.what());
        }
    }
    if (!r.replications.empty()) c.replications = parse_count(r.replications, "replications");

    if (!c.tamed && (c.subcommand == "chaos" || c.subcommand == "oracle-mean" || c.subcommand == "fg-rate"))
        throw ConfigError("untamed", c.subcommand + " always uses the tamed scheme");
    if (c.subcommand == "oracle-mean" && c.model && *c.model != "linear")
        throw ConfigError("model", "oracle-mean needs the linear model");
    return c;
}

std::string default_model(const RunConfig& c) {
    if (c.model) return *c.model;
    return (c.subcommand == "chaos" || c.subcommand == "oracle-mean") ? "linear" : "example1";
}

ExperimentReport dispatch(const RunConfig& c, std::string& summary) {
    const std::string name = default_model(c);
    std::ostringstream s;
    auto fit_text = [](const ExperimentReport& r) {
        if (!r.fit) return std::string("slope undefined");
        return "slope " + format_real(r.fit->slope) + " (log residual " + format_real(r.fit->residual) + ")";
    };

    if (c.subcommand == "simulate") {
        const ModelSpec model = builtin(name, c.params);
        const Rational horizon = c.horizon.value_or(Rational(4));
        const TimeGrid grid = build_grid(model.lags, horizon, c.delta.value_or(dyadic(10)),
                                         c.snap.value_or(model.default_snap));
        SimulationOptions sim;
        sim.workers = c.workers;
        for (const auto& t : c.snapshots) {
            const Rational k = t / grid.delta();
            if (!k.is_integer() || t < Rational(0) || horizon < t)
                throw ConfigError("snapshots", "time " + t.str() + " is not a grid point in [0, T]");
            sim.snapshot_steps.push_back(k.num());
        }
        ExperimentReport rep = simulation_report(model, grid, TamingConfig{c.gamma, c.tamed},
                                                 c.n_particles.value_or(100), c.seed, sim);
        s << "terminal mean " << format_real(rep.annotations["terminal_mean"].get<double>())
          << ", second moment " << format_real(rep.annotations["terminal_second_moment"].get<double>());
        summary = s.str();
        return rep;
    }
    if (c.subcommand == "convergence") {
        ConvergenceOptions o;
        if (c.horizon) o.horizon = *c.horizon;
        o.gamma = c.gamma;
        o.tamed = c.tamed;
        if (c.n_particles) o.n_particles = *c.n_particles;
        if (c.finest) o.finest_exponent = *c.finest;
        if (!c.levels.empty()) o.level_exponents = c.levels;
        o.seed = c.seed;
        const ModelSpec model = builtin(name, c.params);
        o.snap = c.snap.value_or(model.default_snap);
        o.workers = c.workers;
        ExperimentReport rep = convergence_study(model, o);
        summary = fit_text(rep);
        return rep;
    }
    if (c.subcommand == "chaos") {
        ChaosOptions o;
        if (c.horizon) o.horizon = *c.horizon;
        o.gamma = c.gamma;
        if (c.delta) o.delta = *c.delta;
        if (!c.n_list.empty()) o.n_list = c.n_list;
        if (c.n_ref) o.n_reference = *c.n_ref;
        if (c.probes) o.probe_count = *c.probes;
        if (c.p) o.p = *c.p;
        o.seed = c.seed;
        const ModelSpec model = builtin(name, c.params);
        o.snap = c.snap.value_or(model.default_snap);
        o.workers = c.workers;
        ExperimentReport rep = chaos_study(model, o);
        summary = fit_text(rep);
        return rep;
    }
    if (c.subcommand == "moments") {
        MomentOptions o;
        if (c.horizon) o.horizon = *c.horizon;
        o.gamma = c.gamma;
        o.tamed = c.tamed;
        o.deltas = c.deltas;
        if (o.deltas.empty())
            for (int e = 6; e <= 10; ++e) o.deltas.push_back(dyadic(e));
        if (c.n_particles) o.n_particles = *c.n_particles;
        if (c.p) o.p = *c.p;
        o.seeds = c.seeds;
        if (o.seeds.empty())
            for (std::uint64_t k = 0; k < 20; ++k) o.seeds.push_back(c.seed + k);
        const ModelSpec model = builtin(name, c.params);
        o.snap = c.snap.value_or(model.default_snap);
        o.workers = c.workers;
        ExperimentReport rep = moment_sweep(model, o);
        std::int64_t blowups = 0;
        for (std::size_t row = 0; row < rep.rows.size(); ++row)
            blowups += static_cast<std::int64_t>(rep.number(row, "blowup_count"));
        s << "moment ratio "
          << (rep.annotations.contains("moment_ratio") ? format_real(rep.annotations["moment_ratio"].get<double>())
                                                      : std::string("undefined"))
          << ", blow-ups " << blowups;
        summary = s.str();
        return rep;
    }
    if (c.subcommand == "fg-rate") {
        FgRateOptions o;
        o.sampler = parse_sampler(c.sampler);
        if (c.p) o.p = *c.p;
        o.n_list = c.n_list;
        if (o.n_list.empty())
            for (int e = 5; e <= 12; ++e) o.n_list.push_back(std::size_t{1} << e);
        if (c.replications) o.replications = *c.replications;
        o.seed = c.seed;
        ExperimentReport rep = fg_rate_check(o);
        summary = fit_text(rep);
        return rep;
    }
    // oracle-mean
    OracleOptions o;
    if (c.horizon) o.horizon = *c.horizon;
    o.gamma = c.gamma;
    if (c.delta) o.delta = *c.delta;
    if (c.n_particles) o.n_particles = *c.n_particles;
    o.seed = c.seed;
    o.workers = c.workers;
    ExperimentReport rep = meanfield_oracle(c.params, o);
    s << "gap " << format_real(rep.number(0, "gap")) << " within tolerance "
      << format_real(rep.annotations["tolerance"].get<double>());
    summary = s.str();
    return rep;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
    if (!f) throw Error("write failed for " + path.string());
}

std::string provisional_id(const RunConfig& c) {
    ExperimentReport stub;
    stub.kind = c.subcommand;
    stub.config = c.to_json();
    stub.assign_run_id();
    return stub.run_id;
}

} // namespace

nlohmann::json RunConfig::to_json() const {
    // workers and the output location do not influence results
    nlohmann::json j;
    j["subcommand"] = subcommand;
    j["model"] = model ? nlohmann::json(*model) : nlohmann::json(nullptr);
    j["params"] = params;
    j["T"] = horizon ? nlohmann::json(horizon->str()) : nlohmann::json(nullptr);
    j["delta"] = delta ? nlohmann::json(delta->str()) : nlohmann::json(nullptr);
    j["gamma"] = gamma;
    j["tamed"] = tamed;
    j["N"] = n_particles ? nlohmann::json(*n_particles) : nlohmann::json(nullptr);
    j["seed"] = seed;
    j["snap"] = snap ? nlohmann::json(*snap) : nlohmann::json(nullptr);
    nlohmann::json snaps = nlohmann::json::array();
    for (const auto& t : snapshots) snaps.push_back(t.str());
    j["snapshots"] = snaps;
    j["finest"] = finest ? nlohmann::json(*finest) : nlohmann::json(nullptr);
    j["levels"] = levels;
    j["n_list"] = n_list;
    j["n_ref"] = n_ref ? nlohmann::json(*n_ref) : nlohmann::json(nullptr);
    j["probes"] = probes ? nlohmann::json(*probes) : nlohmann::json(nullptr);
    j["p"] = p ? nlohmann::json(*p) : nlohmann::json(nullptr);
    nlohmann::json ds = nlohmann::json::array();
    for (const auto& d : deltas) ds.push_back(d.str());
    j["deltas"] = ds;
    j["seeds"] = seeds;
    j["sampler"] = sampler;
    j["replications"] = replications ? nlohmann::json(*replications) : nlohmann::json(nullptr);
    return j;
}

RunConfig parse(const std::vector<std::string>& args) {
    auto bundle = build_app();
    std::vector<std::string> reversed(args.rbegin(), args.rend()); // CLI11 consumes from the back
    try {
        bundle->app.parse(reversed);
    } catch (const CLI::Success&) {
        throw;
    } catch (const CLI::Error& e) {
        throw ConfigError(field_of(e), e.what());
    }
    return convert(*bundle);
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const std::string fallback_id = provisional_id(config);
    try {
        std::string summary;
        ExperimentReport rep = dispatch(config, summary);
        std::filesystem::create_directories(config.out_dir);
        const std::filesystem::path dir(config.out_dir);
        const auto csv_path = dir / (rep.run_id + ".csv");
        write_file(csv_path, rep.csv(config.timings));
        write_file(dir / (rep.run_id + ".jsonl"), rep.sidecar().dump() + "\n");
        for (const auto& note : rep.notes) err << "note: " << note << "\n";
        out << rep.run_id << ": " << summary << " -> " << csv_path.string() << "\n";
        return 0;
    } catch (const ConfigError& e) {
        throw;
    } catch (const DeltaOutOfRange& e) {
        throw ConfigError("delta", e.what());
    } catch (const IncommensurableGrid& e) {
        throw ConfigError("delta", e.what());
    } catch (const std::exception& e) {
        err << "error [" << fallback_id << "]: " << e.what() << "\n";
        try {
            std::filesystem::create_directories(config.out_dir);
            nlohmann::json j{{"run_id", fallback_id}, {"kind", config.subcommand}, {"config", config.to_json()},
                             {"error", e.what()}};
            write_file(std::filesystem::path(config.out_dir) / (fallback_id + ".jsonl"), j.dump() + "\n");
        } catch (const std::exception&) {
        }
        return 1;
    }
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig config;
    try {
        config = parse(args);
    } catch (const CLI::Success&) {
        out << build_app()->app.help();
        return 0;
    } catch (const ConfigError& e) {
        err << "config error (" << e.field() << "): " << e.what() << "\n";
        return 2;
    }
    try {
        return run(config, out, err);
    } catch (const ConfigError& e) {
        err << "config error (" << e.field() << "): " << e.what() << "\n";
        return 2;
    }
}

} // namespace nmv::cli
