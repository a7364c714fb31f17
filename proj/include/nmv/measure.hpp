#pragma once

#include "nmv/empirical.hpp"
#include "nmv/report.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nmv {

/// (1/N sum |x_j|^q)^{1/q}; for q = 2 this is W_2(view, delta_0).
double moment_norm(const EmpiricalView& view, double q);

/// Exact W_p between equal-count one-dimensional empirical measures via
/// order statistics.
double wasserstein_1d(const EmpiricalView& a, const EmpiricalView& b, double p);

/// W_p^p between two sorted one-dimensional samples of possibly different
/// sizes, integrating |F_a^{-1}(u) - F_b^{-1}(u)|^p over u in (0,1).
double wasserstein_pp_sorted(std::span<const double> sorted_a, std::span<const double> sorted_b, double p);

inline constexpr std::size_t kExactWassersteinCap = 512;

/// Result of a square assignment problem.
struct Assignment {
    std::vector<std::size_t> column_of_row;
    double cost = 0.0;
};

/// Minimum-cost perfect matching on an n x n row-major cost matrix
/// (shortest augmenting paths with potentials, O(n^3)).
Assignment solve_assignment(std::span<const double> cost, std::size_t n);

/// Exact W_p between equal-count empirical measures of any dimension.
/// Throws CapExceeded above `cap` points.
double wasserstein_exact(const EmpiricalView& a, const EmpiricalView& b, double p,
                         std::size_t cap = kExactWassersteinCap);

struct SlicedEstimate {
    double value = 0.0;     // (mean over projections of W_p^p)^{1/p}
    double mean_pp = 0.0;   // mean over projections of W_p^p
    double std_error = 0.0; // standard error of mean_pp
};

/// Sliced Wasserstein surrogate: random unit directions, exact 1-D W_p^p of
/// the projections, averaged. Approximate by construction; needs d >= 2.
SlicedEstimate wasserstein_sliced_estimate(const EmpiricalView& a, const EmpiricalView& b, double p,
                                           std::size_t n_projections = 128, std::uint64_t seed = 0);
double wasserstein_sliced(const EmpiricalView& a, const EmpiricalView& b, double p,
                          std::size_t n_projections = 128, std::uint64_t seed = 0);

enum class Sampler { normal, uniform, point };

Sampler parse_sampler(const std::string& name);
std::string to_string(Sampler s);

struct FgRateOptions {
    Sampler sampler = Sampler::normal;
    double p = 2.0;
    std::vector<std::size_t> n_list;
    std::size_t replications = 20;
    std::uint64_t seed = 1;
    std::size_t reference_size = 1'000'000;
};

/// Estimates E W_p^p(mu_N, mu) for each N against a large reference sample of
/// mu and fits the log-log slope in N. One-dimensional samplers only.
ExperimentReport fg_rate_check(const FgRateOptions& options);

} // namespace nmv
