#include "nmv/model.hpp"

#include "nmv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nmv {

double GrowthMeta::l_u() const noexcept {
    return std::max({l1, l2, l3});
}

void ModelSpec::validate() const {
    if (dim_state == 0) throw ConfigError("dim_state", "must be positive");
    if (dim_noise == 0) throw ConfigError("dim_noise", "must be positive");
    if (lags.empty() || lags.front() != Rational(0)) throw ConfigError("lags", "first lag must be 0");
    for (std::size_t v = 1; v < lags.size(); ++v)
        if (lags[v] < lags[v - 1]) throw ConfigError("lags", "lags must be nondecreasing");
    if (!(lags.back() > Rational(0))) throw ConfigError("lags", "maximal delay must be positive");
    if (!neutral || !drift || !diffusion || !initial_path)
        throw ConfigError("model", "model '" + name + "' is missing a coefficient function");
    if (!(initial_spread >= 0.0) || !std::isfinite(initial_spread))
        throw ConfigError("xi_sd", "initial spread must be finite and nonnegative");

    std::vector<double> zero(dim_state, 0.0), out(dim_state, 0.0);
    neutral(zero, out);
    for (double v : out)
        if (v != 0.0) throw ConfigError("model", "model '" + name + "' violates D(0) = 0");
}

namespace {

void require_finite(std::span<const double> v, const char* quantity, std::size_t lags) {
    for (double x : v)
        if (!std::isfinite(x)) throw ModelEvaluationError(quantity, lags, "non-finite value");
}

void check_inputs(const ModelSpec& m, const LagInputs& in) {
    if (in.dim != m.dim_state || in.states.size() != m.lag_count() * m.dim_state ||
        in.measures.size() != m.lag_count())
        throw DimensionMismatch("coefficient inputs do not match model '" + m.name + "'");
    require_finite(in.states, "state", m.lag_count());
}

struct ParamReader {
    const ParamMap& overrides;
    ParamMap resolved;
    std::vector<std::string> known;

    double real(const std::string& key, double fallback) {
        known.push_back(key);
        double value = fallback;
        if (auto it = overrides.find(key); it != overrides.end()) {
            std::size_t pos = 0;
            try {
                value = std::stod(it->second, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos == 0 || pos != it->second.size() || !std::isfinite(value))
                throw ConfigError("param." + key, "expected a real number, got '" + it->second + "'");
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", value);
        resolved[key] = buf;
        return value;
    }

    Rational rational(const std::string& key, const Rational& fallback) {
        known.push_back(key);
        Rational value = fallback;
        if (auto it = overrides.find(key); it != overrides.end()) {
            try {
                value = Rational::parse(it->second);
            } catch (const std::exception& e) {
                throw ConfigError("param." + key, e.what());
            }
        }
        resolved[key] = value.str();
        return value;
    }

    void finish(std::string_view model) const {
        for (const auto& [k, v] : overrides)
            if (std::find(known.begin(), known.end(), k) == known.end())
                throw ConfigError("param." + k, "unknown parameter for model '" + std::string(model) + "'");
    }
};

// d[Y + Y^3(t-2)] = [-2Y + Y(t-.25) - 2Y^5(t-2) + E Y(t-.25) - E Y(t-.5)] dt
//                 + [Y + .25 Y(t-.2) + E Y(t-.4)] dB,   xi(t) = |t|^{1/2} + 4
ModelSpec make_example1(const ParamMap& overrides) {
    ParamReader p{overrides, {}, {}};
    p.finish("example1");

    ModelSpec m;
    m.name = "example1";
    m.dim_state = 1;
    m.dim_noise = 1;
    // lag index: 0 -> 0, 1 -> .2, 2 -> .25, 3 -> .4, 4 -> .5, 5 -> 2
    m.lags = {Rational(0), Rational(1, 5), Rational(1, 4), Rational(2, 5), Rational(1, 2), Rational(2)};
    m.neutral = [](std::span<const double> x, std::span<double> out) { out[0] = -x[0] * x[0] * x[0]; };
    m.drift = [](const LagInputs& in, std::span<double> out) {
        const double y0 = in.state(0, 0);
        const double y5 = in.state(5, 0);
        const double y5sq = y5 * y5;
        out[0] = -2.0 * y0 + in.state(2, 0) - 2.0 * y5sq * y5sq * y5 + in.mean(2, 0) - in.mean(4, 0);
    };
    m.diffusion = [](const LagInputs& in, std::span<double> out) {
        out[0] = in.state(0, 0) + 0.25 * in.state(1, 0) + in.mean(3, 0);
    };
    m.initial_path = [](double t, std::span<double> out) { out[0] = std::sqrt(std::abs(t)) + 4.0; };
    m.growth = GrowthMeta{2.0, 4.0, 1.0, std::nullopt};
    m.default_snap = true;
    m.params = p.resolved;
    return m;
}

// d[Y1 + 2 sin Y1(t-4); Y2 + 4 Y2^2(t-4)]
//   = [-3Y2 + Y1(t-.1) - 4Y1^3(t-4) + E Y2(t-.4) - 3 E Y1(t-1);
//      -4 S|S| + 30 Y2^2(t-4) + 6 Y2 - 2 Y2^5(t-4)] dt,   S = Y2 + 4 Y2^2(t-4)
//   + [2Y2 + E Y1(t-.1); 4Y1 + E Y2(t-.1)] dB,            xi(t) = |t|^{2/3} + 1
ModelSpec make_example2(const ParamMap& overrides) {
    ParamReader p{overrides, {}, {}};
    p.finish("example2");

    ModelSpec m;
    m.name = "example2";
    m.dim_state = 2;
    m.dim_noise = 1;
    // lag index: 0 -> 0, 1 -> .1, 2 -> .4, 3 -> 1, 4 -> 4
    m.lags = {Rational(0), Rational(1, 10), Rational(2, 5), Rational(1), Rational(4)};
    m.neutral = [](std::span<const double> x, std::span<double> out) {
        out[0] = -2.0 * std::sin(x[0]);
        out[1] = -4.0 * x[1] * x[1];
    };
    m.drift = [](const LagInputs& in, std::span<double> out) {
        const double y2 = in.state(0, 1);
        const double w1 = in.state(4, 0);
        const double w2 = in.state(4, 1);
        const double w2sq = w2 * w2;
        const double s = y2 + 4.0 * w2sq;
        out[0] = -3.0 * y2 + in.state(1, 0) - 4.0 * w1 * w1 * w1 + in.mean(2, 1) - 3.0 * in.mean(3, 0);
        out[1] = -4.0 * s * std::abs(s) + 30.0 * w2sq + 6.0 * y2 - 2.0 * w2sq * w2sq * w2;
    };
    m.diffusion = [](const LagInputs& in, std::span<double> out) {
        out[0] = 2.0 * in.state(0, 1) + in.mean(1, 0);
        out[1] = 4.0 * in.state(0, 0) + in.mean(1, 1);
    };
    m.initial_path = [](double t, std::span<double> out) {
        const double v = std::cbrt(t * t) + 1.0;
        out[0] = v;
        out[1] = v;
    };
    m.growth = GrowthMeta{1.0, 4.0, 1.0, std::nullopt};
    m.default_snap = true;
    m.params = p.resolved;
    return m;
}

ModelSpec make_linear(const ParamMap& overrides) {
    ParamReader p{overrides, {}, {}};
    const double kappa = p.real("kappa", 0.3);
    const double a = p.real("a", -1.0);
    const double b = p.real("b", 0.5);
    const double c = p.real("c", 0.5);
    const double sigma1 = p.real("sigma1", 0.2);
    const double sigma2 = p.real("sigma2", 0.1);
    const double xi0 = p.real("xi0", 1.0);
    const double xi_sd = p.real("xi_sd", 0.0);
    const Rational rho2 = p.rational("rho2", Rational(1, 2));
    const Rational rho3 = p.rational("rho3", Rational(1));
    p.finish("linear");
    if (!(rho3 > Rational(0))) throw ConfigError("param.rho3", "must be positive");
    if (rho2 < Rational(0) || rho2 > rho3) throw ConfigError("param.rho2", "must lie in [0, rho3]");

    ModelSpec m;
    m.name = "linear";
    m.dim_state = 1;
    m.dim_noise = 1;
    m.lags = {Rational(0), rho2, rho3};
    m.neutral = [kappa](std::span<const double> x, std::span<double> out) { out[0] = kappa * x[0]; };
    m.drift = [a, b, c](const LagInputs& in, std::span<double> out) {
        out[0] = a * in.state(0, 0) + b * in.state(1, 0) + c * in.mean(2, 0);
    };
    m.diffusion = [sigma1, sigma2](const LagInputs& in, std::span<double> out) {
        out[0] = sigma1 * in.state(0, 0) + sigma2 * in.mean(0, 0);
    };
    m.initial_path = [xi0](double, std::span<double> out) { out[0] = xi0; };
    m.initial_spread = xi_sd;
    m.growth = GrowthMeta{1.0, 1.0, 1.0, std::abs(kappa)};
    m.default_snap = false;
    m.params = p.resolved;
    return m;
}

} // namespace

std::vector<double> eval_drift(const ModelSpec& model, const LagInputs& in) {
    check_inputs(model, in);
    std::vector<double> out(model.dim_state, 0.0);
    model.drift(in, out);
    require_finite(out, "drift", model.lag_count());
    return out;
}

std::vector<double> eval_diffusion(const ModelSpec& model, const LagInputs& in) {
    check_inputs(model, in);
    std::vector<double> out(model.dim_state * model.dim_noise, 0.0);
    model.diffusion(in, out);
    require_finite(out, "diffusion", model.lag_count());
    return out;
}

std::vector<double> eval_neutral(const ModelSpec& model, std::span<const double> x) {
    if (x.size() != model.dim_state) throw DimensionMismatch("neutral input has wrong dimension");
    require_finite(x, "state", model.lag_count());
    std::vector<double> out(model.dim_state, 0.0);
    model.neutral(x, out);
    require_finite(out, "neutral", model.lag_count());
    return out;
}

ModelSpec builtin(std::string_view name, const ParamMap& overrides) {
    ModelSpec m;
    if (name == "example1")
        m = make_example1(overrides);
    else if (name == "example2")
        m = make_example2(overrides);
    else if (name == "linear")
        m = make_linear(overrides);
    else
        throw ConfigError("model", "unknown model '" + std::string(name) + "'");
    m.validate();
    return m;
}

std::vector<std::string> builtin_names() {
    return {"example1", "example2", "linear"};
}

} // namespace nmv
