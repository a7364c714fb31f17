#pragma once

#include "nmv/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nmv {

/// A delay that had to be moved onto the grid.
struct LagSnap {
    std::size_t lag = 0; // zero-based lag index
    Rational requested;
    Rational used;
    double distance = 0.0; // |used - requested|
};

/// Uniform grid t_k = k * delta with every delay an exact integer number of
/// steps: delta * big_m == rho, delta * big_mt == horizon,
/// delta * lag_offsets[v] == lags[v].
class TimeGrid {
public:
    const Rational& delta() const noexcept { return delta_; }
    const Rational& horizon() const noexcept { return horizon_; }
    std::int64_t big_m() const noexcept { return big_m_; }
    std::int64_t big_mt() const noexcept { return big_mt_; }
    std::span<const std::int64_t> lag_offsets() const noexcept { return lag_offsets_; }
    std::size_t lag_count() const noexcept { return lag_offsets_.size(); }

    bool snapped() const noexcept { return !snaps_.empty(); }
    std::span<const LagSnap> snaps() const noexcept { return snaps_; }

    /// Grid index addressed by lag v (zero-based) from step k, i.e. k - offset_v.
    /// Negative results address the initial segment.
    std::int64_t lag_index(std::int64_t k, std::size_t v) const { return k - lag_offsets_[v]; }

    /// t_k computed from integers on demand, never accumulated.
    double time(std::int64_t k) const noexcept {
        return static_cast<double>(k) * static_cast<double>(delta_.num()) / static_cast<double>(delta_.den());
    }
    Rational exact_time(std::int64_t k) const { return Rational(k) * delta_; }

private:
    friend TimeGrid build_grid(std::span<const Rational>, const Rational&, const Rational&, bool);

    Rational delta_;
    Rational horizon_;
    std::int64_t big_m_ = 0;
    std::int64_t big_mt_ = 0;
    std::vector<std::int64_t> lag_offsets_;
    std::vector<LagSnap> snaps_;
};

/// Build a delay-aligned grid. With `snap` every non-aligned lag is moved to
/// round(lag/delta)*delta and recorded; otherwise IncommensurableGrid.
/// The horizon is never snapped.
/// Throws DeltaOutOfRange unless 0 < delta < 1.
TimeGrid build_grid(std::span<const Rational> lags, const Rational& horizon, const Rational& delta, bool snap);

} // namespace nmv
