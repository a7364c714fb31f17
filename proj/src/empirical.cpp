#include "nmv/empirical.hpp"

#include "nmv/errors.hpp"

#include <cmath>

namespace nmv {

namespace {

constexpr std::size_t kLeaf = 8;

double tree_sum(const double* x, std::size_t count, std::size_t stride) {
    if (count <= kLeaf) {
        double s = 0.0;
        for (std::size_t j = 0; j < count; ++j) s += x[j * stride];
        return s;
    }
    const std::size_t half = count / 2;
    return tree_sum(x, half, stride) + tree_sum(x + half * stride, count - half, stride);
}

double tree_sum_sq(const double* x, std::size_t count, std::size_t dim) {
    if (count <= kLeaf) {
        double s = 0.0;
        for (std::size_t j = 0; j < count; ++j)
            for (std::size_t c = 0; c < dim; ++c) s += x[j * dim + c] * x[j * dim + c];
        return s;
    }
    const std::size_t half = count / 2;
    return tree_sum_sq(x, half, dim) + tree_sum_sq(x + half * dim, count - half, dim);
}

} // namespace

double pairwise_sum(std::span<const double> x, std::size_t count, std::size_t stride, std::size_t offset) {
    if (count == 0) return 0.0;
    return tree_sum(x.data() + offset, count, stride);
}

void EmpiricalView::statistics(std::span<const double> samples, std::size_t dim, std::vector<double>& mean,
                               double& second_moment) {
    const std::size_t n = samples.size() / dim;
    mean.assign(dim, 0.0);
    for (std::size_t c = 0; c < dim; ++c) mean[c] = pairwise_sum(samples, n, dim, c) / static_cast<double>(n);
    second_moment = tree_sum_sq(samples.data(), n, dim) / static_cast<double>(n);
}

EmpiricalView::EmpiricalView(std::span<const double> samples, std::size_t dim) : samples_(samples), dim_(dim) {
    if (dim == 0 || samples.empty() || samples.size() % dim != 0)
        throw DimensionMismatch("empirical view needs N >= 1 points of dimension d >= 1");
    statistics(samples_, dim_, mean_, second_moment_);
}

EmpiricalView::EmpiricalView(std::span<const double> samples, std::size_t dim, std::vector<double> mean,
                             double second_moment)
    : samples_(samples), dim_(dim), mean_(std::move(mean)), second_moment_(second_moment) {
    if (dim == 0 || samples.empty() || samples.size() % dim != 0 || mean_.size() != dim)
        throw DimensionMismatch("empirical view needs N >= 1 points of dimension d >= 1");
}

} // namespace nmv
