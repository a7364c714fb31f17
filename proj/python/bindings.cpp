#include "nmv/engine.hpp"
#include "nmv/errors.hpp"
#include "nmv/experiments.hpp"
#include "nmv/measure.hpp"
#include "nmv/model.hpp"
#include "nmv/noise.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace nmv;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Rational rat(const std::string& text, const char* field) {
    try {
        return Rational::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(field, e.what());
    }
}

std::vector<Rational> rats(const std::vector<std::string>& items, const char* field) {
    std::vector<Rational> out;
    for (const auto& s : items) out.push_back(rat(s, field));
    return out;
}

// (N, d) samples; a 1-D array is N points on the line.
EmpiricalView view_of(const Array& a, std::vector<double>& storage) {
    if (a.ndim() != 1 && a.ndim() != 2) throw DimensionMismatch("samples must be a 1-D or 2-D array");
    const std::size_t d = a.ndim() == 1 ? 1 : static_cast<std::size_t>(a.shape(1));
    storage.assign(a.data(), a.data() + a.size());
    return EmpiricalView(storage, d);
}

py::dict report_dict(const ExperimentReport& r, bool timings) {
    py::dict out;
    out["run_id"] = r.run_id;
    out["kind"] = r.kind;
    out["csv"] = r.csv(timings);
    out["sidecar"] = r.sidecar().dump();
    out["slope"] = r.fit ? py::cast(r.fit->slope) : py::none();
    return out;
}

py::array_t<double> matrix(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    py::array_t<double> a({rows, cols});
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

} // namespace

PYBIND11_MODULE(_nmv, m) {
    m.doc() = "Tamed Euler-Maruyama particle simulation of neutral multiple-delay McKean-Vlasov equations";

    auto base = py::register_exception<Error>(m, "NmvError", PyExc_RuntimeError);
    auto config = py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DeltaOutOfRange>(m, "DeltaOutOfRange", config.ptr());
    py::register_exception<IncommensurableGrid>(m, "IncommensurableGrid", config.ptr());
    py::register_exception<NonFiniteState>(m, "NonFiniteState", base.ptr());

    m.def("builtin_names", &builtin_names);

    m.def(
        "model_info",
        [](const std::string& name, const ParamMap& params) {
            const ModelSpec s = builtin(name, params);
            py::dict out;
            std::vector<std::string> lags;
            for (const auto& l : s.lags) lags.push_back(l.str());
            out["name"] = s.name;
            out["dim_state"] = s.dim_state;
            out["dim_noise"] = s.dim_noise;
            out["lags"] = lags;
            out["default_snap"] = s.default_snap;
            out["params"] = s.params;
            return out;
        },
        py::arg("name"), py::arg("params") = ParamMap{});

    m.def(
        "grid",
        [](const std::string& name, const ParamMap& params, const std::string& horizon, const std::string& delta,
           std::optional<bool> snap) {
            const ModelSpec s = builtin(name, params);
            const TimeGrid g = build_grid(s.lags, rat(horizon, "T"), rat(delta, "delta"), snap.value_or(s.default_snap));
            py::dict out;
            out["delta"] = g.delta().str();
            out["M"] = g.big_m();
            out["M_T"] = g.big_mt();
            out["offsets"] = std::vector<std::int64_t>(g.lag_offsets().begin(), g.lag_offsets().end());
            std::vector<std::pair<std::string, std::string>> snaps;
            for (const auto& sn : g.snaps()) snaps.emplace_back(sn.requested.str(), sn.used.str());
            out["snaps"] = snaps;
            return out;
        },
        py::arg("model"), py::arg("params"), py::arg("T"), py::arg("delta"), py::arg("snap") = py::none());

    m.def(
        "simulate",
        [](const std::string& name, const ParamMap& params, const std::string& horizon, const std::string& delta,
           double gamma, bool tamed, std::size_t n, std::uint64_t seed, std::optional<bool> snap, int workers,
           std::int64_t ratio, std::size_t trace) {
            const ModelSpec s = builtin(name, params);
            const TimeGrid g = build_grid(s.lags, rat(horizon, "T"), rat(delta, "delta"), snap.value_or(s.default_snap));
            SimulationOptions o;
            o.workers = workers;
            o.ratio = ratio;
            o.trace_particles = trace;
            o.track_sup = true;
            Trajectory t;
            {
                py::gil_scoped_release release;
                t = simulate(s, g, TamingConfig{gamma, tamed}, n, seed, o);
            }
            py::dict out;
            out["terminal"] = matrix(t.terminal, t.n_particles, t.dim);
            out["sup_norm"] = py::array_t<double>(static_cast<py::ssize_t>(t.sup_norm.size()), t.sup_norm.data());
            if (trace > 0) {
                py::array_t<double> tr({trace, static_cast<std::size_t>(t.steps + 1), t.dim});
                std::copy(t.traces.begin(), t.traces.end(), tr.mutable_data());
                out["traces"] = tr;
                std::vector<double> times(static_cast<std::size_t>(t.steps + 1));
                for (std::int64_t k = 0; k <= t.steps; ++k) times[static_cast<std::size_t>(k)] = g.time(k);
                out["times"] = times;
            }
            out["warnings"] = t.warnings;
            return out;
        },
        py::arg("model"), py::arg("params"), py::arg("T"), py::arg("delta"), py::arg("gamma") = 0.5,
        py::arg("tamed") = true, py::arg("N") = 100, py::arg("seed") = 1, py::arg("snap") = py::none(),
        py::arg("workers") = 1, py::arg("ratio") = 1, py::arg("trace") = 0);

    m.def(
        "convergence_study",
        [](const std::string& name, const ParamMap& params, const std::string& horizon, double gamma, bool tamed,
           std::size_t n, int finest, const std::vector<int>& levels, std::uint64_t seed, std::optional<bool> snap,
           int workers, bool timings) {
            const ModelSpec s = builtin(name, params);
            ConvergenceOptions o;
            o.horizon = rat(horizon, "T");
            o.gamma = gamma;
            o.tamed = tamed;
            o.n_particles = n;
            o.finest_exponent = finest;
            o.level_exponents = levels;
            o.seed = seed;
            o.snap = snap.value_or(s.default_snap);
            o.workers = workers;
            ExperimentReport r;
            {
                py::gil_scoped_release release;
                r = convergence_study(s, o);
            }
            return report_dict(r, timings);
        },
        py::arg("model"), py::arg("params"), py::arg("T"), py::arg("gamma"), py::arg("tamed"), py::arg("N"),
        py::arg("finest"), py::arg("levels"), py::arg("seed"), py::arg("snap"), py::arg("workers"),
        py::arg("timings"));

    m.def(
        "chaos_study",
        [](const std::string& name, const ParamMap& params, const std::string& horizon, double gamma,
           const std::string& delta, const std::vector<std::size_t>& n_list, std::size_t n_ref, std::size_t probes,
           double p, std::uint64_t seed, std::optional<bool> snap, int workers, bool timings) {
            const ModelSpec s = builtin(name, params);
            ChaosOptions o;
            o.horizon = rat(horizon, "T");
            o.gamma = gamma;
            o.delta = rat(delta, "delta");
            o.n_list = n_list;
            o.n_reference = n_ref;
            o.probe_count = probes;
            o.p = p;
            o.seed = seed;
            o.snap = snap.value_or(s.default_snap);
            o.workers = workers;
            ExperimentReport r;
            {
                py::gil_scoped_release release;
                r = chaos_study(s, o);
            }
            return report_dict(r, timings);
        },
        py::arg("model"), py::arg("params"), py::arg("T"), py::arg("gamma"), py::arg("delta"), py::arg("n_list"),
        py::arg("n_ref"), py::arg("probes"), py::arg("p"), py::arg("seed"), py::arg("snap"), py::arg("workers"),
        py::arg("timings"));

    m.def(
        "moment_sweep",
        [](const std::string& name, const ParamMap& params, const std::string& horizon, double gamma, bool tamed,
           const std::vector<std::string>& deltas, std::size_t n, double p, const std::vector<std::uint64_t>& seeds,
           std::optional<bool> snap, int workers, bool timings) {
            const ModelSpec s = builtin(name, params);
            MomentOptions o;
            o.horizon = rat(horizon, "T");
            o.gamma = gamma;
            o.tamed = tamed;
            o.deltas = rats(deltas, "deltas");
            o.n_particles = n;
            o.p = p;
            o.seeds = seeds;
            o.snap = snap.value_or(s.default_snap);
            o.workers = workers;
            ExperimentReport r;
            {
                py::gil_scoped_release release;
                r = moment_sweep(s, o);
            }
            return report_dict(r, timings);
        },
        py::arg("model"), py::arg("params"), py::arg("T"), py::arg("gamma"), py::arg("tamed"), py::arg("deltas"),
        py::arg("N"), py::arg("p"), py::arg("seeds"), py::arg("snap"), py::arg("workers"), py::arg("timings"));

    m.def(
        "fg_rate_check",
        [](const std::string& sampler, double p, const std::vector<std::size_t>& n_list, std::size_t replications,
           std::uint64_t seed, std::size_t reference_size, bool timings) {
            FgRateOptions o;
            o.sampler = parse_sampler(sampler);
            o.p = p;
            o.n_list = n_list;
            o.replications = replications;
            o.seed = seed;
            o.reference_size = reference_size;
            ExperimentReport r;
            {
                py::gil_scoped_release release;
                r = fg_rate_check(o);
            }
            return report_dict(r, timings);
        },
        py::arg("sampler"), py::arg("p"), py::arg("n_list"), py::arg("replications"), py::arg("seed"),
        py::arg("reference_size"), py::arg("timings"));

    m.def(
        "meanfield_oracle",
        [](const ParamMap& params, const std::string& horizon, double gamma, const std::string& delta, std::size_t n,
           std::uint64_t seed, int workers, bool enforce, bool timings) {
            OracleOptions o;
            o.horizon = rat(horizon, "T");
            o.gamma = gamma;
            o.delta = rat(delta, "delta");
            o.n_particles = n;
            o.seed = seed;
            o.workers = workers;
            o.enforce = enforce;
            ExperimentReport r;
            {
                py::gil_scoped_release release;
                r = meanfield_oracle(params, o);
            }
            return report_dict(r, timings);
        },
        py::arg("params"), py::arg("T"), py::arg("gamma"), py::arg("delta"), py::arg("N"), py::arg("seed"),
        py::arg("workers"), py::arg("enforce"), py::arg("timings"));

    m.def(
        "wasserstein_exact",
        [](const Array& a, const Array& b, double p) {
            std::vector<double> sa, sb;
            return wasserstein_exact(view_of(a, sa), view_of(b, sb), p);
        },
        py::arg("a"), py::arg("b"), py::arg("p") = 2.0);
    m.def(
        "wasserstein_1d",
        [](const Array& a, const Array& b, double p) {
            std::vector<double> sa, sb;
            return wasserstein_1d(view_of(a, sa), view_of(b, sb), p);
        },
        py::arg("a"), py::arg("b"), py::arg("p") = 2.0);
    m.def(
        "wasserstein_sliced",
        [](const Array& a, const Array& b, double p, std::size_t projections, std::uint64_t seed) {
            std::vector<double> sa, sb;
            const auto e = wasserstein_sliced_estimate(view_of(a, sa), view_of(b, sb), p, projections, seed);
            return py::make_tuple(e.value, e.std_error);
        },
        py::arg("a"), py::arg("b"), py::arg("p") = 2.0, py::arg("projections") = 128, py::arg("seed") = 0);
    m.def(
        "moment_norm",
        [](const Array& a, double q) {
            std::vector<double> sa;
            return moment_norm(view_of(a, sa), q);
        },
        py::arg("samples"), py::arg("q") = 2.0);

    m.def(
        "tame_drift",
        [](const Array& alpha, double delta, double gamma) {
            std::vector<double> v(alpha.data(), alpha.data() + alpha.size());
            const auto t = tame_drift(v, delta, gamma);
            return py::array_t<double>(static_cast<py::ssize_t>(t.size()), t.data());
        },
        py::arg("alpha"), py::arg("delta"), py::arg("gamma") = 0.5);

    m.def(
        "standard_normal",
        [](std::uint64_t seed, std::uint32_t particle, std::int64_t step, std::uint32_t component) {
            return standard_normal({seed, particle, step, component});
        },
        py::arg("seed"), py::arg("particle"), py::arg("step"), py::arg("component") = 0);
}
