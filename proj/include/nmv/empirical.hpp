#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nmv {

/// Deterministic pairwise (tree) sum of x[offset + j*stride], j < count.
/// The summation order depends only on `count`.
double pairwise_sum(std::span<const double> x, std::size_t count, std::size_t stride = 1, std::size_t offset = 0);

/// Read-only equal-weight empirical measure over N points of R^d, stored
/// point-major (sample j occupies samples[j*d .. j*d+d)).
///
/// The view does not own its samples. Mean and raw second moment
/// (1/N) sum |x_j|^2 are cached at construction.
class EmpiricalView {
public:
    EmpiricalView() = default;
    EmpiricalView(std::span<const double> samples, std::size_t dim);
    /// Adopt precomputed statistics (caller guarantees they match the samples).
    EmpiricalView(std::span<const double> samples, std::size_t dim, std::vector<double> mean, double second_moment);

    std::size_t size() const noexcept { return dim_ == 0 ? 0 : samples_.size() / dim_; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> samples() const noexcept { return samples_; }
    std::span<const double> sample(std::size_t j) const { return samples_.subspan(j * dim_, dim_); }

    std::span<const double> mean() const noexcept { return mean_; }
    double mean(std::size_t component) const { return mean_[component]; }
    double second_moment() const noexcept { return second_moment_; }

    /// Mean and raw second moment of a point-major sample block.
    static void statistics(std::span<const double> samples, std::size_t dim, std::vector<double>& mean,
                           double& second_moment);

private:
    std::span<const double> samples_;
    std::size_t dim_ = 0;
    std::vector<double> mean_;
    double second_moment_ = 0.0;
};

} // namespace nmv
