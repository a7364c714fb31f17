#include "nmv/grid.hpp"

#include "nmv/errors.hpp"

#include <cmath>
#include <string>

namespace nmv {

TimeGrid build_grid(std::span<const Rational> lags, const Rational& horizon, const Rational& delta, bool snap) {
    if (!(delta > Rational(0)) || !(delta < Rational(1)))
        throw DeltaOutOfRange("step size " + delta.str() + " outside (0,1)");
    if (!(horizon > Rational(0))) throw ConfigError("T", "horizon must be positive");
    if (lags.empty() || lags.front() != Rational(0))
        throw ConfigError("lags", "first lag must be 0");
    for (std::size_t v = 1; v < lags.size(); ++v)
        if (lags[v] < lags[v - 1]) throw ConfigError("lags", "lags must be nondecreasing");
    if (!(lags.back() > Rational(0))) throw ConfigError("lags", "maximal delay must be positive");

    TimeGrid g;
    g.delta_ = delta;
    g.horizon_ = horizon;

    std::vector<std::string> offending;
    const Rational steps_t = horizon / delta;
    if (!steps_t.is_integer()) offending.push_back("T=" + horizon.str());

    g.lag_offsets_.reserve(lags.size());
    for (std::size_t v = 0; v < lags.size(); ++v) {
        const Rational q = lags[v] / delta;
        if (q.is_integer()) {
            g.lag_offsets_.push_back(q.num());
            continue;
        }
        if (!snap) {
            offending.push_back("lag " + lags[v].str());
            g.lag_offsets_.push_back(0);
            continue;
        }
        const std::int64_t k = round_to_integer(q);
        const Rational used = Rational(k) * delta;
        g.snaps_.push_back({v, lags[v], used, std::abs((used - lags[v]).to_double())});
        g.lag_offsets_.push_back(k);
    }
    if (!offending.empty()) {
        std::string msg = "not an integer multiple of step " + delta.str() + ":";
        for (const auto& o : offending) msg += " " + o;
        throw IncommensurableGrid(offending, msg);
    }

    g.big_m_ = g.lag_offsets_.back();
    g.big_mt_ = steps_t.num();
    if (g.big_m_ < 1) throw IncommensurableGrid({"lag " + lags.back().str()}, "maximal delay snaps to zero steps");
    return g;
}

} // namespace nmv
