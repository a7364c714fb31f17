#include "nmv/report.hpp"

#include "nmv/errors.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

namespace nmv {

SlopeFit fit_slope(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw SlopeUndefined("slope needs at least 3 points, got " + std::to_string(points.size()));
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
            throw SlopeUndefined("slope needs positive finite points");
        sx += std::log(x);
        sy += std::log(y);
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y) - my);
    }
    if (sxx == 0.0) throw SlopeUndefined("all abscissae coincide");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (const auto& [x, y] : points) {
        const double r = std::log(y) - (fit.intercept + fit.slope * std::log(x));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void ExperimentReport::assign_run_id() {
    // FNV-1a over the canonical config dump
    const std::string text = kind + "|" + config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    run_id = kind + "-" + buf;
}

std::size_t ExperimentReport::column_index(const std::string& column) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == column) return i;
    throw std::out_of_range("no column '" + column + "' in " + kind + " report");
}

double ExperimentReport::number(std::size_t row, const std::string& column) const {
    const Cell& c = rows.at(row).at(column_index(column));
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    throw std::invalid_argument("column '" + column + "' is not numeric");
}

std::string ExperimentReport::csv(bool include_timings) const {
    std::ostringstream out;
    out << "run_id";
    for (const auto& c : columns) out << ',' << c;
    out << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out << run_id;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            out << ',';
            if (columns[c] == "wall_ms") {
                if (include_timings && r < wall_ms.size()) out << format_real(wall_ms[r]);
                continue;
            }
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>)
                        out << format_real(v);
                    else
                        out << v;
                },
                rows[r][c]);
        }
        out << '\n';
    }
    return out.str();
}

nlohmann::json ExperimentReport::sidecar() const {
    nlohmann::json j;
    j["run_id"] = run_id;
    j["kind"] = kind;
    j["config"] = config;
    j["annotations"] = annotations;
    j["notes"] = notes;
    if (fit) j["fit"] = {{"slope", fit->slope}, {"intercept", fit->intercept}, {"residual", fit->residual}};
    else j["fit"] = nullptr;
    nlohmann::json pts = nlohmann::json::array();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        nlohmann::json p = nlohmann::json::object();
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (columns[c] == "wall_ms") continue;
            std::visit([&](const auto& v) { p[columns[c]] = v; }, rows[r][c]);
        }
        if (r < wall_ms.size()) p["wall_ms"] = wall_ms[r];
        if (r < row_extras.size()) p.update(row_extras[r]);
        pts.push_back(std::move(p));
    }
    j["points"] = std::move(pts);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char ts[32];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["created"] = ts;
    return j;
}

} // namespace nmv
