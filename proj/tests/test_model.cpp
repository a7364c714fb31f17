#include <doctest.h>

#include "nmv/errors.hpp"
#include "nmv/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using nmv::Rational;

namespace {

// Lag inputs where every lagged law is a point mass at the given mean.
struct Inputs {
    std::vector<double> states;
    std::vector<std::vector<double>> means;
    std::vector<nmv::EmpiricalView> views;
    std::size_t dim;

    Inputs(std::size_t lags, std::size_t d) : states(lags * d, 0.0), means(lags, std::vector<double>(d, 0.0)), dim(d) {}

    nmv::LagInputs get() {
        views.clear();
        for (auto& m : means) views.emplace_back(m, dim);
        return {states, views, dim};
    }
};

} // namespace

TEST_SUITE("model") {

TEST_CASE("registered delays") {
    const auto e1 = nmv::builtin("example1");
    CHECK(e1.lags == std::vector<Rational>{Rational(0), Rational(1, 5), Rational(1, 4), Rational(2, 5),
                                           Rational(1, 2), Rational(2)});
    CHECK(e1.rho() == Rational(2));
    const auto e2 = nmv::builtin("example2");
    CHECK(e2.lags == std::vector<Rational>{Rational(0), Rational(1, 10), Rational(2, 5), Rational(1), Rational(4)});
    CHECK(e2.rho() == Rational(4));
    CHECK(e2.dim_state == 2);
    CHECK(e2.dim_noise == 1);
    CHECK_THROWS_AS(nmv::builtin("nope"), nmv::ConfigError);
}

TEST_CASE("example 1 drift") {
    const auto m = nmv::builtin("example1");
    Inputs in(6, 1);
    CHECK(nmv::eval_drift(m, in.get())[0] == 0.0);
    in.states[0] = 1; // Y(t)
    in.states[2] = 1; // Y(t - 0.25)
    in.states[5] = 1; // Y(t - 2)
    in.means[2][0] = 1;
    in.means[4][0] = 1;
    CHECK(nmv::eval_drift(m, in.get())[0] == doctest::Approx(-2.0 + 1.0 - 2.0 + 1.0 - 1.0));
}

TEST_CASE("linear drift") {
    const auto m = nmv::builtin("linear", {{"a", "-1"}, {"b", "0"}, {"c", "0"}});
    Inputs in(3, 1);
    in.states[0] = 2;
    CHECK(nmv::eval_drift(m, in.get())[0] == doctest::Approx(-2.0));
}

TEST_CASE("example 1 diffusion") {
    const auto m = nmv::builtin("example1");
    Inputs in(6, 1);
    CHECK(nmv::eval_diffusion(m, in.get())[0] == 0.0);
    in.states[0] = 1;
    in.states[1] = 4; // Y(t - 0.2)
    in.means[3][0] = 0.5; // E Y(t - 0.4)
    CHECK(nmv::eval_diffusion(m, in.get())[0] == doctest::Approx(1.0 + 0.25 * 4.0 + 0.5));
}

TEST_CASE("example 2 diffusion") {
    const auto m = nmv::builtin("example2");
    Inputs in(5, 2);
    in.states[0] = 1;
    in.states[1] = 1;
    const auto b = nmv::eval_diffusion(m, in.get());
    REQUIRE(b.size() == 2);
    CHECK(b[0] == doctest::Approx(2.0));
    CHECK(b[1] == doctest::Approx(4.0));
}

TEST_CASE("neutral maps") {
    const auto e1 = nmv::builtin("example1");
    CHECK(nmv::eval_neutral(e1, std::vector<double>{0.0})[0] == 0.0);
    CHECK(nmv::eval_neutral(e1, std::vector<double>{2.0})[0] == doctest::Approx(-8.0));
    const auto e2 = nmv::builtin("example2");
    const auto d = nmv::eval_neutral(e2, std::vector<double>{std::numbers::pi / 2, 1.0});
    CHECK(d[0] == doctest::Approx(-2.0));
    CHECK(d[1] == doctest::Approx(-4.0));
    const auto lin = nmv::builtin("linear", {{"kappa", "0"}});
    CHECK(nmv::eval_neutral(lin, std::vector<double>{3.0})[0] == 0.0);
}

TEST_CASE("initial paths") {
    std::vector<double> x(1), y(2);
    const auto e1 = nmv::builtin("example1");
    e1.initial_path(0.0, x);
    CHECK(x[0] == doctest::Approx(4.0));
    e1.initial_path(-1.0, x);
    CHECK(x[0] == doctest::Approx(5.0));
    e1.initial_path(-2.0, x);
    CHECK(x[0] == doctest::Approx(std::sqrt(2.0) + 4.0));
    const auto e2 = nmv::builtin("example2");
    e2.initial_path(-1.0, y);
    CHECK(y[0] == doctest::Approx(2.0));
    CHECK(y[1] == doctest::Approx(2.0));
    e2.initial_path(-4.0, y);
    CHECK(y[0] == doctest::Approx(std::cbrt(16.0) + 1.0));
}

TEST_CASE("D(0) = 0 and finite evaluation for every model") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (const auto& name : nmv::builtin_names()) {
        const auto m = nmv::builtin(name);
        CHECK_NOTHROW(m.validate());
        const std::vector<double> zero(m.dim_state, 0.0);
        for (double v : nmv::eval_neutral(m, zero)) CHECK(v == 0.0);
        Inputs in(m.lag_count(), m.dim_state);
        for (int trial = 0; trial < 2000; ++trial) {
            for (auto& s : in.states) s = u(rng);
            for (auto& mv : in.means)
                for (auto& c : mv) c = u(rng);
            const auto li = in.get();
            for (double v : nmv::eval_drift(m, li)) REQUIRE(std::isfinite(v));
            for (double v : nmv::eval_diffusion(m, li)) REQUIRE(std::isfinite(v));
            for (double v : nmv::eval_neutral(m, li.state(0))) REQUIRE(std::isfinite(v));
        }
    }
}

TEST_CASE("non-finite coefficients are reported") {
    const auto m = nmv::builtin("linear");
    Inputs in(3, 1);
    in.states[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(nmv::eval_drift(m, in.get()), nmv::ModelEvaluationError);
}

TEST_CASE("parameters") {
    CHECK_THROWS_AS(nmv::builtin("linear", {{"zeta", "1"}}), nmv::ConfigError);
    try {
        nmv::builtin("linear", {{"zeta", "1"}});
    } catch (const nmv::ConfigError& e) {
        CHECK(e.field() == "param.zeta");
    }
    CHECK_THROWS_AS(nmv::builtin("example1", {{"a", "1"}}), nmv::ConfigError);
    CHECK_THROWS_AS(nmv::builtin("linear", {{"a", "x"}}), nmv::ConfigError);
    const auto m = nmv::builtin("linear", {{"rho2", "1/4"}, {"rho3", "3/4"}});
    CHECK(m.lags == std::vector<Rational>{Rational(0), Rational(1, 4), Rational(3, 4)});
}

TEST_CASE("example 1 one-sided bound") {
    // (x1 - D(x5) - y1 + D(y5)) (alpha(x) - alpha(y))
    //   <= K (sum_i |x_i - y_i|^2 + (1 + x5^4 + y5^4)^2 |x5 - y5|^2), K = 30
    const auto m = nmv::builtin("example1");
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 2.0);
    Inputs ix(6, 1), iy(6, 1);
    double worst = -1e300;
    for (int trial = 0; trial < 100000; ++trial) {
        for (std::size_t v = 0; v < 6; ++v) {
            ix.states[v] = g(rng);
            iy.states[v] = g(rng);
            ix.means[v][0] = iy.means[v][0] = g(rng);
        }
        const double x5 = ix.states[5], y5 = iy.states[5];
        const double lhs = (ix.states[0] - nmv::eval_neutral(m, std::vector<double>{x5})[0] - iy.states[0] +
                            nmv::eval_neutral(m, std::vector<double>{y5})[0]) *
                           (nmv::eval_drift(m, ix.get())[0] - nmv::eval_drift(m, iy.get())[0]);
        double sq = 0.0;
        for (std::size_t v = 0; v < 6; ++v) sq += (ix.states[v] - iy.states[v]) * (ix.states[v] - iy.states[v]);
        const double u2 = 1.0 + std::pow(x5, 4) + std::pow(y5, 4);
        const double rhs = sq + u2 * u2 * (x5 - y5) * (x5 - y5);
        worst = std::max(worst, lhs / rhs);
    }
    CHECK(worst <= 30.0);
}

} // TEST_SUITE
