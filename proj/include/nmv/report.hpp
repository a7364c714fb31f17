#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace nmv {

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // RMS of the log-log residuals
};

/// Least squares of log y against log x. Needs >= 3 points with x, y > 0,
/// otherwise SlopeUndefined.
SlopeFit fit_slope(std::span<const std::pair<double, double>> points);

using Cell = std::variant<std::int64_t, double, std::string>;

/// Tabular result of one experiment plus its configuration echo.
///
/// The CSV carries only deterministic content; wall-clock timings and the
/// creation timestamp are written to the JSON-lines sidecar unless timings
/// are explicitly requested in the CSV.
struct ExperimentReport {
    std::string kind;
    std::string run_id;
    std::vector<std::string> columns; // CSV columns after run_id
    std::vector<std::vector<Cell>> rows;
    std::vector<double> wall_ms; // one per row
    std::vector<nlohmann::json> row_extras; // per-row sidecar data (std errors, ...)
    std::optional<SlopeFit> fit;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json annotations = nlohmann::json::object();
    std::vector<std::string> notes;

    /// Sets run_id from a hash of kind and config.
    void assign_run_id();

    double number(std::size_t row, const std::string& column) const;
    std::size_t column_index(const std::string& column) const;

    /// CSV with header; a "wall_ms" column is filled only when include_timings.
    std::string csv(bool include_timings = false) const;
    nlohmann::json sidecar() const;
};

/// Shortest round-trip representation used for every real number written.
std::string format_real(double v);

} // namespace nmv
