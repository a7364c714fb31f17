#include <doctest.h>

#include "nmv/engine.hpp"
#include "nmv/errors.hpp"
#include "nmv/noise.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using nmv::Rational;

namespace {

nmv::ModelSpec zero_linear(nmv::ParamMap extra = {}) {
    nmv::ParamMap p{{"kappa", "0"}, {"a", "0"}, {"b", "0"}, {"c", "0"}, {"sigma1", "0"}, {"sigma2", "0"}};
    for (const auto& [k, v] : extra) p[k] = v;
    return nmv::builtin("linear", p);
}

nmv::TimeGrid grid_for(const nmv::ModelSpec& m, Rational horizon, Rational delta, bool snap = false) {
    return nmv::build_grid(m.lags, horizon, delta, snap);
}

} // namespace

TEST_SUITE("engine") {

TEST_CASE("taming examples") {
    const std::vector<double> zero{0.0}, three{3.0}, vec{3.0, 4.0};
    CHECK(nmv::tame_drift(zero, 0.25, 0.5)[0] == 0.0);
    CHECK(nmv::tame_drift(three, Rational(1, 4), 0.5)[0] == doctest::Approx(1.2));
    const auto t = nmv::tame_drift(vec, 0.25, 0.5);
    CHECK(t[0] == doctest::Approx(3.0 / 3.5));
    CHECK(t[1] == doctest::Approx(4.0 / 3.5));
}

TEST_CASE("taming bound and direction") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 100000; ++trial) {
        const std::size_t d = 1 + static_cast<std::size_t>(trial % 4);
        std::vector<double> a(d);
        const double scale = std::pow(10.0, 8.0 * u01(rng) - 3.0);
        for (auto& x : a) x = scale * g(rng);
        const double delta = std::max(1e-12, u01(rng) * 0.999);
        const double gamma = std::max(1e-6, 0.5 * u01(rng));
        const auto t = nmv::tame_drift(a, delta, gamma);
        double na = 0, nt = 0, dot = 0;
        for (std::size_t c = 0; c < d; ++c) {
            na += a[c] * a[c];
            nt += t[c] * t[c];
            dot += a[c] * t[c];
        }
        na = std::sqrt(na);
        nt = std::sqrt(nt);
        REQUIRE(nt <= std::min(std::pow(delta, -gamma), na) * (1 + 1e-12));
        if (na > 0) REQUIRE(dot / (na * nt) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("taming configuration") {
    CHECK_THROWS_AS((nmv::TamingConfig{0.7, true}.validate()), nmv::ConfigError);
    CHECK_THROWS_AS((nmv::TamingConfig{0.0, true}.validate()), nmv::ConfigError);
    CHECK_NOTHROW((nmv::TamingConfig{0.7, false}.validate()));
}

TEST_CASE("initial state of example 1") {
    const auto m = nmv::builtin("example1");
    const auto g = grid_for(m, Rational(1), nmv::dyadic(6), true);
    nmv::ParticleEnsemble ens(m, g, 5, 1);
    const double z0 = 4.0 + std::pow(std::sqrt(2.0) + 4.0, 3);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(ens.state(i, 0)[0] == 4.0);
        CHECK(ens.neutral_state(i)[0] == doctest::Approx(z0).epsilon(1e-14));
    }
    const auto lin = zero_linear({{"xi0", "3"}});
    nmv::ParticleEnsemble e2(lin, grid_for(lin, Rational(1), nmv::dyadic(4)), 2, 1);
    CHECK(e2.neutral_state(0)[0] == 3.0);
}

TEST_CASE("one tamed step of the linear model") {
    const auto m = zero_linear({{"a", "-1"}, {"xi0", "2"}});
    const auto g = grid_for(m, Rational(1, 2), Rational(1, 2));
    const auto run = nmv::simulate(m, g, {0.5, true}, 3, 1);
    const double expected = 2.0 - 1.0 / (1.0 + 2.0 * std::sqrt(0.5));
    for (double x : run.terminal) CHECK(x == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(1.586).epsilon(1e-3));
}

TEST_CASE("zero coefficients keep the state constant") {
    const auto m = zero_linear({{"xi0", "1.5"}});
    nmv::SimulationOptions o;
    o.trace_particles = 2;
    const auto run = nmv::simulate(m, grid_for(m, Rational(2), nmv::dyadic(5)), {}, 4, 3, o);
    for (std::size_t i = 0; i < 2; ++i)
        for (double x : run.trace(i)) CHECK(x == 1.5);
}

TEST_CASE("a single particle interacts with itself") {
    const auto m = zero_linear({{"c", "1"}, {"xi0", "2"}});
    const auto g = grid_for(m, Rational(1, 4), Rational(1, 4));
    const auto run = nmv::simulate(m, g, {0.5, true}, 1, 1);
    const double expected = 2.0 + 2.0 / (1.0 + 0.5 * 2.0) * 0.25;
    CHECK(run.terminal[0] == doctest::Approx(expected).epsilon(1e-14));
    REQUIRE_FALSE(run.warnings.empty());
}

TEST_CASE("noise-free system follows the tamed deterministic recursion") {
    const auto m = zero_linear({{"kappa", "0"}, {"a", "-0.7"}, {"b", "0.4"}, {"c", "-0.9"}, {"xi0", "1.3"}});
    const Rational delta = nmv::dyadic(6);
    const auto g = grid_for(m, Rational(3), delta);
    const auto run = nmv::simulate(m, g, {0.5, true}, 16, 5);

    const double h = delta.to_double();
    const std::int64_t k2 = g.lag_offsets()[1], k3 = g.lag_offsets()[2], mm = g.big_m();
    std::vector<double> x(static_cast<std::size_t>(mm + g.big_mt() + 1), 1.3);
    auto at = [&](std::int64_t k) -> double& { return x[static_cast<std::size_t>(k + mm)]; };
    for (std::int64_t k = 0; k < g.big_mt(); ++k) {
        const double a = -0.7 * at(k) + 0.4 * at(k - k2) - 0.9 * at(k - k3);
        at(k + 1) = at(k) + a / (1.0 + std::sqrt(h) * std::abs(a)) * h;
    }
    for (double v : run.terminal) CHECK(v == doctest::Approx(at(g.big_mt())).epsilon(1e-13));
}

TEST_CASE("worker count does not change results") {
    for (const char* name : {"example1", "example2", "linear"}) {
        const auto m = nmv::builtin(name);
        const auto g = grid_for(m, m.rho() + Rational(1, 2), nmv::dyadic(6), true);
        nmv::SimulationOptions o1, o8;
        o1.workers = 1;
        o8.workers = 8;
        const auto r1 = nmv::simulate(m, g, {}, 64, 17, o1);
        const auto r8 = nmv::simulate(m, g, {}, 64, 17, o8);
        CHECK(r1.terminal == r8.terminal);
    }
}

TEST_CASE("neutral bookkeeping audit") {
    for (const char* name : {"example1", "example2", "linear"}) {
        const auto m = nmv::builtin(name);
        nmv::SimulationOptions o;
        o.audit_every = 1;
        const auto run = nmv::simulate(m, grid_for(m, m.rho() * Rational(3, 2), nmv::dyadic(6), true), {}, 16, 2, o);
        CHECK(run.max_audit_error <= 1e-12);
    }
}

TEST_CASE("coarse steps consume sums of fine increments") {
    // dX = X dB with X(0) = 1: every step multiplies by (1 + dB)
    const auto m = zero_linear({{"sigma1", "1"}});
    const Rational delta = nmv::dyadic(5);
    const auto g = grid_for(m, Rational(1), delta);
    nmv::SimulationOptions o;
    o.ratio = 2;
    const auto run = nmv::simulate(m, g, {}, 3, 8, o);
    const Rational fine = delta / Rational(2);
    for (std::uint32_t i = 0; i < 3; ++i) {
        double x = 1.0;
        for (std::int64_t k = 0; k < g.big_mt(); ++k) {
            const double db = nmv::fine_increment({8, i, 2 * k, 0}, fine) + nmv::fine_increment({8, i, 2 * k + 1, 0}, fine);
            x = x + x * db;
        }
        CHECK(run.terminal[i] == x);
    }
}

TEST_CASE("relabelling particles permutes the output") {
    const auto m = nmv::builtin("linear", {{"xi_sd", "0.5"}});
    const auto g = grid_for(m, Rational(2), nmv::dyadic(6));
    const std::size_t n = 24;
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), std::mt19937(4));
    nmv::SimulationOptions o;
    o.noise_keys = perm;
    const auto base = nmv::simulate(m, g, {}, n, 6);
    const auto moved = nmv::simulate(m, g, {}, n, 6, o);
    for (std::size_t i = 0; i < n; ++i) CHECK(moved.terminal[i] == doctest::Approx(base.terminal[perm[i]]).epsilon(1e-12));
}

TEST_CASE("untamed blow-up is reported") {
    const auto m = nmv::builtin("example1");
    const auto g = grid_for(m, Rational(8), Rational(1, 4), true);
    try {
        nmv::simulate(m, g, {0.5, false}, 4, 1);
        FAIL("expected NonFiniteState");
    } catch (const nmv::NonFiniteState& e) {
        CHECK(e.particle() == 0);
    }
}

TEST_CASE("example 1 smoke run") {
    const auto m = nmv::builtin("example1");
    const auto g = grid_for(m, Rational(4), nmv::dyadic(10), true);
    const auto run = nmv::simulate(m, g, {0.5, true}, 100, 1);
    double m2 = 0.0;
    for (double x : run.terminal) {
        REQUIRE(std::isfinite(x));
        m2 += x * x;
    }
    m2 /= 100.0;
    INFO("second moment at T = " << m2);
    CHECK(m2 < 1e6);
}

} // TEST_SUITE
