#include "nmv/measure.hpp"

#include "nmv/errors.hpp"
#include "nmv/noise.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace nmv {

namespace {

double pow_abs(double x, double p) {
    const double a = std::abs(x);
    return p == 1.0 ? a : p == 2.0 ? a * a : std::pow(a, p);
}

double distance_pow(std::span<const double> x, std::span<const double> y, double p) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
    return p == 2.0 ? s : std::pow(std::sqrt(s), p);
}

void require_p(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("p", "order must be a finite real >= 1");
}

void require_compatible(const EmpiricalView& a, const EmpiricalView& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("measures live in different dimensions");
    if (a.size() != b.size()) throw CountMismatch("measures have different sample counts");
}

std::vector<double> sorted_copy(std::span<const double> x) {
    std::vector<double> v(x.begin(), x.end());
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace

double moment_norm(const EmpiricalView& view, double q) {
    require_p(q);
    const std::size_t n = view.size();
    std::vector<double> terms(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (double x : view.sample(j)) s += x * x;
        terms[j] = q == 2.0 ? s : std::pow(std::sqrt(s), q);
    }
    return std::pow(pairwise_sum(terms, n) / static_cast<double>(n), 1.0 / q);
}

double wasserstein_1d(const EmpiricalView& a, const EmpiricalView& b, double p) {
    require_p(p);
    if (a.dim() != 1 || b.dim() != 1) throw DimensionMismatch("wasserstein_1d needs one-dimensional samples");
    require_compatible(a, b);
    const auto sa = sorted_copy(a.samples());
    const auto sb = sorted_copy(b.samples());
    std::vector<double> terms(sa.size());
    for (std::size_t j = 0; j < sa.size(); ++j) terms[j] = pow_abs(sa[j] - sb[j], p);
    return std::pow(pairwise_sum(terms, terms.size()) / static_cast<double>(terms.size()), 1.0 / p);
}

double wasserstein_pp_sorted(std::span<const double> a, std::span<const double> b, double p) {
    require_p(p);
    if (a.empty() || b.empty()) throw CountMismatch("empty sample");
    const auto na = static_cast<std::int64_t>(a.size());
    const auto nb = static_cast<std::int64_t>(b.size());
    // Quantile breakpoints (i+1)/na and (k+1)/nb compared exactly in integers.
    std::int64_t i = 0, k = 0;
    double u = 0.0, total = 0.0;
    while (i < na && k < nb) {
        const std::int64_t lhs = (i + 1) * nb;
        const std::int64_t rhs = (k + 1) * na;
        const double next = lhs <= rhs ? static_cast<double>(i + 1) / static_cast<double>(na)
                                       : static_cast<double>(k + 1) / static_cast<double>(nb);
        total += (next - u) * pow_abs(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(k)], p);
        u = next;
        if (lhs <= rhs) ++i;
        if (rhs <= lhs) ++k;
    }
    return total;
}

Assignment solve_assignment(std::span<const double> cost, std::size_t n) {
    if (cost.size() != n * n) throw DimensionMismatch("assignment cost matrix is not n x n");
    Assignment result;
    if (n == 0) return result;
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials; row 0 / column 0 are the virtual source.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> row_of_col(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    auto c = [&](std::size_t i, std::size_t j) { return cost[(i - 1) * n + (j - 1)]; };

    for (std::size_t i = 1; i <= n; ++i) {
        row_of_col[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = row_of_col[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = c(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of_col[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    result.column_of_row.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) result.column_of_row[row_of_col[j] - 1] = j - 1;
    for (std::size_t i = 0; i < n; ++i) result.cost += cost[i * n + result.column_of_row[i]];
    return result;
}

double wasserstein_exact(const EmpiricalView& a, const EmpiricalView& b, double p, std::size_t cap) {
    require_p(p);
    require_compatible(a, b);
    const std::size_t n = a.size();
    if (n > cap) throw CapExceeded("exact Wasserstein limited to " + std::to_string(cap) + " points, got " + std::to_string(n));
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = distance_pow(a.sample(i), b.sample(j), p);
    const Assignment as = solve_assignment(cost, n);
    return std::pow(std::max(as.cost, 0.0) / static_cast<double>(n), 1.0 / p);
}

SlicedEstimate wasserstein_sliced_estimate(const EmpiricalView& a, const EmpiricalView& b, double p,
                                           std::size_t n_projections, std::uint64_t seed) {
    require_p(p);
    require_compatible(a, b);
    if (a.dim() < 2) throw DimensionMismatch("sliced Wasserstein needs d >= 2");
    if (n_projections == 0) throw ConfigError("n_projections", "must be positive");
    const std::size_t d = a.dim(), n = a.size();
    std::vector<double> dir(d), pa(n), pb(n), values(n_projections);
    for (std::size_t l = 0; l < n_projections; ++l) {
        double norm = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            dir[c] = standard_normal({seed, static_cast<std::uint32_t>(l), noise_stream::projection,
                                      static_cast<std::uint32_t>(c)});
            norm += dir[c] * dir[c];
        }
        norm = std::sqrt(norm);
        for (auto& x : dir) x /= norm;
        for (std::size_t j = 0; j < n; ++j) {
            double sa = 0.0, sb = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                sa += dir[c] * a.sample(j)[c];
                sb += dir[c] * b.sample(j)[c];
            }
            pa[j] = sa;
            pb[j] = sb;
        }
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        values[l] = wasserstein_pp_sorted(pa, pb, p);
    }
    SlicedEstimate est;
    const double k = static_cast<double>(n_projections);
    est.mean_pp = pairwise_sum(values, n_projections) / k;
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean_pp) * (v - est.mean_pp);
    est.std_error = n_projections > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
    est.value = std::pow(est.mean_pp, 1.0 / p);
    return est;
}

double wasserstein_sliced(const EmpiricalView& a, const EmpiricalView& b, double p, std::size_t n_projections,
                          std::uint64_t seed) {
    return wasserstein_sliced_estimate(a, b, p, n_projections, seed).value;
}

Sampler parse_sampler(const std::string& name) {
    if (name == "normal") return Sampler::normal;
    if (name == "uniform") return Sampler::uniform;
    if (name == "point") return Sampler::point;
    throw ConfigError("sampler", "unknown sampler '" + name + "' (normal, uniform, point)");
}

std::string to_string(Sampler s) {
    switch (s) {
    case Sampler::normal: return "normal";
    case Sampler::uniform: return "uniform";
    case Sampler::point: return "point";
    }
    return "?";
}

namespace {

std::vector<double> draw_sorted(Sampler s, std::uint64_t seed, std::uint32_t stream, std::int64_t block,
                                std::size_t count) {
    std::vector<double> x(count);
    for (std::size_t j = 0; j < count; ++j) {
        const NoiseKey key{seed, stream, block, static_cast<std::uint32_t>(j)};
        switch (s) {
        case Sampler::normal: x[j] = standard_normal(key); break;
        case Sampler::uniform: x[j] = uniform_open(key); break;
        case Sampler::point: x[j] = 0.0; break;
        }
    }
    std::sort(x.begin(), x.end());
    return x;
}

} // namespace

ExperimentReport fg_rate_check(const FgRateOptions& opt) {
    require_p(opt.p);
    if (opt.n_list.empty()) throw ConfigError("n_list", "needs at least one sample size");
    if (opt.replications == 0) throw ConfigError("replications", "must be positive");
    if (opt.reference_size == 0) throw ConfigError("reference_size", "must be positive");
    for (auto n : opt.n_list)
        if (n == 0) throw ConfigError("n_list", "sample sizes must be positive");

    ExperimentReport rep;
    rep.kind = "fg-rate";
    rep.columns = {"n_samples", "p", "wpp", "std_error", "wall_ms"};
    rep.config = {{"sampler", to_string(opt.sampler)},
                  {"p", opt.p},
                  {"n_list", opt.n_list},
                  {"replications", opt.replications},
                  {"reference_size", opt.reference_size},
                  {"seed", opt.seed}};
    rep.assign_run_id();

    const auto reference = draw_sorted(opt.sampler, opt.seed, 0xFFFFFFFFu, noise_stream::sampler, opt.reference_size);

    std::vector<std::pair<double, double>> pts, pts_root;
    for (std::size_t n : opt.n_list) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<double> wpp(opt.replications), root(opt.replications);
        for (std::size_t r = 0; r < opt.replications; ++r) {
            const auto x = draw_sorted(opt.sampler, opt.seed, static_cast<std::uint32_t>(r),
                                       noise_stream::sampler - static_cast<std::int64_t>(n), n);
            wpp[r] = wasserstein_pp_sorted(x, reference, opt.p);
            root[r] = std::pow(wpp[r], 1.0 / opt.p);
        }
        const double k = static_cast<double>(opt.replications);
        const double mean = pairwise_sum(wpp, wpp.size()) / k;
        const double mean_root = pairwise_sum(root, root.size()) / k;
        double ss = 0.0;
        for (double w : wpp) ss += (w - mean) * (w - mean);
        const double se = opt.replications > 1 ? std::sqrt(ss / (k - 1.0) / k) : 0.0;
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

        rep.rows.push_back({static_cast<std::int64_t>(n), opt.p, mean, se, 0.0});
        rep.wall_ms.push_back(ms);
        rep.row_extras.push_back({{"mean_wp", mean_root}});
        pts.emplace_back(static_cast<double>(n), mean);
        pts_root.emplace_back(static_cast<double>(n), mean_root);
    }

    // Rate bound for E W_p^p(mu_N, mu) when p > d/2 and enough moments exist.
    rep.annotations["bound_exponent"] = -0.5;
    rep.annotations["statistic"] = "mean W_p^p";
    if (pts.size() >= 3 && std::all_of(pts.begin(), pts.end(), [](auto& q) { return q.second > 0.0; })) {
        rep.fit = fit_slope(pts);
        rep.annotations["slope_mean_wp"] = fit_slope(pts_root).slope;
    } else {
        rep.notes.push_back("slope not fitted: fewer than 3 positive points");
    }
    return rep;
}

} // namespace nmv
