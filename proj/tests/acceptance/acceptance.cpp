// Acceptance run: one PASS/FAIL line per headline criterion.
// Exits nonzero when any criterion fails.

#include "nmv/engine.hpp"
#include "nmv/errors.hpp"
#include "nmv/experiments.hpp"
#include "nmv/measure.hpp"
#include "nmv/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <vector>

using namespace nmv;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(bool ok, const std::string& name, const std::string& detail) {
    if (!ok) ++failures;
    std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
}

void info(const std::string& text) {
    std::printf("      %s\n", text.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string slope_text(const ExperimentReport& r) {
    return r.fit ? fmt("slope %.4f", r.fit->slope) + fmt(" (log residual %.3f)", r.fit->residual)
                 : std::string("slope undefined");
}

bool in_band(const ExperimentReport& r, double lo, double hi) { return r.fit && r.fit->slope >= lo && r.fit->slope <= hi; }

ExperimentReport convergence(const char* model, std::size_t n, int workers) {
    ConvergenceOptions o;
    o.horizon = Rational(4);
    o.gamma = 0.5;
    o.n_particles = n;
    o.finest_exponent = 13;
    o.level_exponents = {12, 11, 10, 9};
    o.snap = true;
    o.seed = 1;
    o.workers = workers;
    return convergence_study(builtin(model), o);
}

void print_rows(const ExperimentReport& r, const std::vector<std::string>& cols) {
    for (std::size_t row = 0; row < r.rows.size(); ++row) {
        std::string line;
        for (const auto& c : cols) line += c + "=" + fmt("%.6g", r.number(row, c)) + "  ";
        info(line);
    }
}

// --- Wasserstein oracle ------------------------------------------------------

double brute_force(const std::vector<double>& a, const std::vector<double>& b, std::size_t d, double p) {
    const std::size_t n = a.size() / d;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t c = 0; c < d; ++c) sq += std::pow(a[j * d + c] - b[perm[j] * d + c], 2);
            s += std::pow(std::sqrt(sq), p);
        }
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::pow(best / static_cast<double>(n), 1.0 / p);
}

} // namespace

int main() {
    const auto t_all = Clock::now();
    std::printf("acceptance suite\n");

    // 1. Convergence rate, example 1
    ExperimentReport conv2;
    {
        const auto t0 = Clock::now();
        const auto r = convergence("example1", 500, 0);
        const double s = seconds_since(t0);
        verdict(in_band(r, 0.35, 0.65) && s <= 180.0, "convergence example1",
                slope_text(r) + ", target [0.35, 0.65]; " + fmt("%.1f s (limit 180 s)", s));
        print_rows(r, {"level_exponent", "err"});
    }
    // 2. Convergence rate, example 2
    {
        const auto t0 = Clock::now();
        conv2 = convergence("example2", 256, 0);
        const double s = seconds_since(t0);
        verdict(in_band(conv2, 0.30, 0.70) && s <= 180.0, "convergence example2",
                slope_text(conv2) + ", target [0.30, 0.70]; " + fmt("%.1f s (limit 180 s)", s));
        print_rows(conv2, {"level_exponent", "err"});
    }

    // 3. Taming property suite
    {
        std::mt19937_64 rng(20240601);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        std::normal_distribution<double> g(0.0, 1.0);
        long bound_violations = 0, direction_violations = 0;
        const long checks = 1000000;
        for (long t = 0; t < checks; ++t) {
            const std::size_t d = 1 + static_cast<std::size_t>(t % 5);
            std::vector<double> a(d);
            const double scale = std::pow(10.0, 12.0 * u01(rng) - 6.0);
            for (auto& x : a) x = scale * g(rng);
            const double delta = std::pow(2.0, -30.0 * u01(rng)) * 0.999;
            const double gamma = 0.5 * (1.0 - u01(rng)); // (0, 1/2]
            const auto out = tame_drift(a, delta, gamma);
            double na = 0, no = 0, dot = 0;
            for (std::size_t c = 0; c < d; ++c) {
                na += a[c] * a[c];
                no += out[c] * out[c];
                dot += a[c] * out[c];
            }
            na = std::sqrt(na);
            no = std::sqrt(no);
            if (no > std::min(std::pow(delta, -gamma), na) * (1.0 + 1e-14)) ++bound_violations;
            if (na > 0.0 && std::abs(dot - na * no) > 1e-12 * na * no) ++direction_violations;
        }
        verdict(bound_violations == 0 && direction_violations == 0, "taming bound and direction",
                std::to_string(checks) + " checks, " + std::to_string(bound_violations) + " bound and " +
                    std::to_string(direction_violations) + " direction violations");
    }

    // 4. Untamed divergence witness
    {
        MomentOptions o;
        o.horizon = Rational(4);
        o.deltas = {dyadic(6)};
        o.n_particles = 100;
        for (std::uint64_t s = 1; s <= 100; ++s) o.seeds.push_back(s);
        o.workers = 0;
        o.tamed = false;
        const auto untamed = moment_sweep(builtin("example1"), o);
        const auto blowups = static_cast<long>(untamed.number(0, "blowup_count"));
        o.tamed = true;
        const auto tamed = moment_sweep(builtin("example1"), o);
        long tamed_nonfinite = 0, tamed_large = 0;
        for (const auto& f : tamed.row_extras[0]["failures"]) {
            if (f["reason"] == "threshold") ++tamed_large;
            else ++tamed_nonfinite;
        }
        verdict(blowups >= 1 && tamed_nonfinite == 0, "untamed divergence witness",
                "untamed blow-ups on " + std::to_string(blowups) + "/100 seeds (need >= 1); tamed non-finite on " +
                    std::to_string(tamed_nonfinite) + "/100 (need 0)");
        info("tamed runs exceeding |X| > 1e10 while finite: " + std::to_string(tamed_large) + "/100");
    }

    // 5. Moment uniformity
    {
        MomentOptions o;
        o.horizon = Rational(4);
        o.p = 2.0;
        for (int e = 6; e <= 10; ++e) o.deltas.push_back(dyadic(e));
        o.n_particles = 200;
        for (std::uint64_t s = 1; s <= 20; ++s) o.seeds.push_back(s);
        o.workers = 0;
        const auto r = moment_sweep(builtin("example1"), o);
        const bool has = r.annotations.contains("moment_ratio");
        const double ratio = has ? r.annotations["moment_ratio"].get<double>() : INFINITY;
        verdict(has && ratio <= 2.0, "moment uniformity", fmt("max/min ratio %.4g, target <= 2", ratio));
        print_rows(r, {"delta", "moment", "blowup_count"});
    }

    // 6. Wasserstein exactness
    {
        std::mt19937_64 rng(77);
        std::uniform_int_distribution<int> pick_n(1, 6), pick_d(1, 3), pick_p(1, 3);
        std::normal_distribution<double> g(0.0, 1.0);
        double worst_exact = 0.0, worst_1d = 0.0;
        for (int t = 0; t < 500; ++t) {
            const auto n = static_cast<std::size_t>(pick_n(rng)), d = static_cast<std::size_t>(pick_d(rng));
            const double p = pick_p(rng);
            std::vector<double> a(n * d), b(n * d);
            for (auto& x : a) x = g(rng);
            for (auto& x : b) x = g(rng);
            worst_exact = std::max(worst_exact, std::abs(wasserstein_exact(EmpiricalView(a, d), EmpiricalView(b, d), p) -
                                                         brute_force(a, b, d, p)));
        }
        for (std::size_t n = 1; n <= 64; ++n)
            for (double p : {1.0, 2.0, 3.0}) {
                std::vector<double> a(n), b(n);
                for (auto& x : a) x = 3.0 * g(rng);
                for (auto& x : b) x = g(rng) + 1.0;
                worst_1d = std::max(worst_1d, std::abs(wasserstein_1d(EmpiricalView(a, 1), EmpiricalView(b, 1), p) -
                                                       wasserstein_exact(EmpiricalView(a, 1), EmpiricalView(b, 1), p)));
            }
        verdict(worst_exact <= 1e-12 && worst_1d <= 1e-10, "wasserstein exactness",
                fmt("max |exact - brute force| %.2e (<= 1e-12), ", worst_exact) +
                    fmt("max |1d - exact| %.2e (<= 1e-10)", worst_1d));
    }

    // 7. Empirical-measure rate
    {
        FgRateOptions o;
        o.sampler = Sampler::normal;
        o.p = 2.0;
        for (int e = 5; e <= 12; ++e) o.n_list.push_back(std::size_t{1} << e);
        o.replications = 20;
        o.seed = 1;
        const auto t0 = Clock::now();
        const auto r = fg_rate_check(o);
        const double s = seconds_since(t0);
        verdict(in_band(r, -0.65, -0.35) && s <= 60.0, "empirical measure rate",
                slope_text(r) + " for E W_2^2, target [-0.65, -0.35]; " + fmt("%.1f s (limit 60 s)", s));
        if (r.annotations.contains("slope_mean_wp"))
            info(fmt("slope of (E W_2^2)^(1/2): %.4f", r.annotations["slope_mean_wp"].get<double>()));
    }

    // 8. Propagation of chaos proxy
    ExperimentReport chaos;
    {
        ChaosOptions o;
        o.n_list = {64, 128, 256, 512, 1024};
        o.n_reference = 4096;
        o.p = 2.0;
        o.seed = 1;
        o.workers = 0;
        const auto t0 = Clock::now();
        chaos = chaos_study(builtin("linear"), o);
        const double s = seconds_since(t0);
        verdict(in_band(chaos, -0.75, -0.25) && s <= 120.0, "propagation of chaos proxy",
                slope_text(chaos) + ", target [-0.75, -0.25]; " + fmt("%.1f s (limit 120 s)", s));
        // seed sensitivity of the single-run statistic (diagnostic only)
        std::vector<double> slopes;
        for (std::uint64_t seed = 2; seed <= 9; ++seed) {
            o.seed = seed;
            const auto r = chaos_study(builtin("linear"), o);
            if (r.fit) slopes.push_back(r.fit->slope);
        }
        const double mean = std::accumulate(slopes.begin(), slopes.end(), 0.0) / static_cast<double>(slopes.size());
        const auto [lo, hi] = std::minmax_element(slopes.begin(), slopes.end());
        const auto inside = std::count_if(slopes.begin(), slopes.end(), [](double v) { return v >= -0.75 && v <= -0.25; });
        info(fmt("seeds 2..9: mean slope %.3f", mean) + fmt(", range [%.3f, ", *lo) + fmt("%.3f], ", *hi) +
             std::to_string(inside) + "/" + std::to_string(slopes.size()) + " inside the band");
    }

    // 9. Mean-field oracle
    ExperimentReport oracle;
    {
        OracleOptions o;
        o.n_particles = 2000;
        o.delta = dyadic(10);
        o.enforce = false;
        o.workers = 0;
        oracle = meanfield_oracle({}, o);
        const double gap = oracle.number(0, "gap"), tol = oracle.annotations["tolerance"].get<double>();
        verdict(gap <= tol, "mean-field oracle",
                fmt("|particle mean - ODE mean| %.3e", gap) + fmt(" <= 3 sd/sqrt(N) + C sqrt(delta) = %.3e", tol));
        info(fmt("particle mean %.6f", oracle.number(0, "mean_particle")) +
             fmt(", ODE mean %.6f", oracle.number(0, "mean_ode")) + fmt(", band %.3e", oracle.number(0, "band")) +
             fmt(", fitted C %.3e", oracle.annotations["c_delta"].get<double>()));
    }

    // 10. Determinism across worker counts
    {
        std::vector<std::string> mismatched;
        auto same = [&](const std::string& name, const ExperimentReport& a, const ExperimentReport& b) {
            if (a.csv() != b.csv()) mismatched.push_back(name);
        };
        same("convergence", conv2, convergence("example2", 256, 1));
        same("convergence/3 workers", conv2, convergence("example2", 256, 3));
        {
            ChaosOptions o;
            o.n_reference = 4096;
            o.workers = 3;
            same("chaos", chaos, chaos_study(builtin("linear"), o));
        }
        {
            OracleOptions o;
            o.n_particles = 2000;
            o.delta = dyadic(10);
            o.enforce = false;
            o.workers = 2;
            same("oracle", oracle, meanfield_oracle({}, o));
        }
        {
            MomentOptions o;
            o.deltas = {dyadic(6), dyadic(7)};
            o.n_particles = 50;
            o.seeds = {1, 2, 3};
            o.workers = 1;
            const auto a = moment_sweep(builtin("example2"), o);
            o.workers = 4;
            same("moments", a, moment_sweep(builtin("example2"), o));
        }
        {
            FgRateOptions o;
            o.n_list = {32, 64, 128};
            o.replications = 5;
            o.reference_size = 20000;
            same("fg-rate", fg_rate_check(o), fg_rate_check(o));
        }
        {
            const auto m = builtin("example1");
            const auto grid = build_grid(m.lags, Rational(3), dyadic(8), true);
            SimulationOptions s1, s4;
            s4.workers = 4;
            same("simulate", simulation_report(m, grid, {}, 100, 7, s1), simulation_report(m, grid, {}, 100, 7, s4));
        }
        std::string detail = "byte-identical CSVs for 1..4 workers across all experiment kinds";
        if (!mismatched.empty()) {
            detail = "mismatch:";
            for (const auto& m : mismatched) detail += " " + m;
        }
        verdict(mismatched.empty(), "determinism", detail);
    }

    std::printf("%d criteria failed; total %.1f s\n", failures, seconds_since(t_all));
    return failures == 0 ? 0 : 1;
}
