#pragma once

#include "nmv/empirical.hpp"
#include "nmv/rational.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nmv {

using ParamMap = std::map<std::string, std::string>;

/// Arguments of the coefficient functions at one particle and one step:
/// the particle's own states at every lag (lag-major, r blocks of d) and the
/// empirical measures of the whole ensemble at the same lags.
struct LagInputs {
    std::span<const double> states;
    std::span<const EmpiricalView> measures;
    std::size_t dim = 1;

    std::span<const double> state(std::size_t lag) const { return states.subspan(lag * dim, dim); }
    double state(std::size_t lag, std::size_t component) const { return states[lag * dim + component]; }
    double mean(std::size_t lag, std::size_t component) const { return measures[lag].mean(component); }
};

/// Writes d values (drift) or d*m values row-major (diffusion) into `out`.
using CoefficientFn = std::function<void(const LagInputs&, std::span<double> out)>;
using NeutralFn = std::function<void(std::span<const double> x, std::span<double> out)>;
using PathFn = std::function<void(double t, std::span<double> out)>;

/// Polynomial growth exponents of the moduli U1, U2, U3 and, where known, the
/// contraction constant of the neutral map. Descriptive only.
struct GrowthMeta {
    double l1 = 1.0;
    double l2 = 1.0;
    double l3 = 1.0;
    std::optional<double> neutral_contraction;

    double l_u() const noexcept;
};

/// A neutral multiple-delay McKean-Vlasov equation
///
///   d[Y(t) - D(Y(t - rho))] = drift(Y at lags, laws at lags) dt
///                             + diffusion(Y at lags, laws at lags) dB(t)
///
/// on R^d driven by m-dimensional noise, with Y = initial_path on [-rho, 0].
/// `lags` holds 0 = rho_1 <= ... <= rho_r = rho; lag index v addresses
/// Y(t - lags[v]). The engine always subtracts D, so an equation written
/// with "+ g(Y(t-rho))" inside the differential stores D = -g.
struct ModelSpec {
    std::string name;
    std::size_t dim_state = 1;
    std::size_t dim_noise = 1;
    std::vector<Rational> lags;

    NeutralFn neutral;
    CoefficientFn drift;
    CoefficientFn diffusion;
    PathFn initial_path;

    /// Standard deviation of an i.i.d. N(0, s^2 I) offset added to the whole
    /// initial path of each particle. Zero means deterministic initial data.
    double initial_spread = 0.0;

    GrowthMeta growth;
    bool default_snap = false;
    ParamMap params;

    const Rational& rho() const { return lags.back(); }
    std::size_t lag_count() const noexcept { return lags.size(); }

    /// Checks the lag ordering, dimensions, presence of every function and D(0) = 0.
    void validate() const;
};

/// drift(...) with a finiteness check; throws ModelEvaluationError.
std::vector<double> eval_drift(const ModelSpec& model, const LagInputs& in);
/// diffusion(...) as a d*m row-major matrix; throws ModelEvaluationError.
std::vector<double> eval_diffusion(const ModelSpec& model, const LagInputs& in);
std::vector<double> eval_neutral(const ModelSpec& model, std::span<const double> x);

/// Registered models:
///   example1  scalar, D(x) = -x^3, delays {0, .2, .25, .4, .5, 2}
///   example2  two-dimensional, D(x) = (-2 sin x1, -4 x2^2), delays {0, .1, .4, 1, 4}
///   linear    D(x) = kappa x, drift a Y(t) + b Y(t-rho2) + c E Y(t-rho3),
///             diffusion sigma1 Y(t) + sigma2 E Y(t)
/// Unknown names or parameters raise ConfigError.
ModelSpec builtin(std::string_view name, const ParamMap& overrides = {});

std::vector<std::string> builtin_names();

} // namespace nmv
