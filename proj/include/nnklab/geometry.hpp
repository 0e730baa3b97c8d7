#pragma once
// Distances, Gaussian kernel and exact brute-force nearest-neighbor search.
// Everything here is a pure function over immutable data.

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "nnklab/dataset.hpp"

namespace nnklab {

inline constexpr std::size_t no_index = std::numeric_limits<std::size_t>::max();

struct KernelConfig {
  double sigma = 0.0;      // bandwidth; must be > 0 when used
  std::size_t k_init = 50; // initial candidate count for neighborhood search
};

// Default bandwidth: 100 * sqrt(dim). On unit-normalized rows this is nearly
// flat; it is exposed so callers can override it.
double default_sigma(std::size_t dim);

// Fills in sigma from the dataset dimension when unset and validates.
KernelConfig resolve_kernel_config(KernelConfig config, std::size_t dim);

double euclidean_distance(std::span<const float> a, std::span<const float> b);

// exp(-||a-b||^2 / (2 sigma^2)), in (0, 1]
double gaussian_kernel(std::span<const float> a, std::span<const float> b, double sigma);
double gaussian_kernel_from_d2(double squared_distance, double sigma);

// Indices of the k nearest rows to `query`, ascending by distance; ties break
// by ascending row index. `exclude` is omitted from the pool. Throws when k
// exceeds the available pool.
std::vector<std::size_t> knn_candidates(const EmbeddingDataset& dataset,
                                        std::span<const float> query, std::size_t k,
                                        std::size_t exclude = no_index);

// Shared search core: (squared distance, index) pairs of the k nearest rows
// passing `label_filter` (when set), ascending, deterministic tie-breaks.
// k is clamped to the eligible pool size.
std::vector<std::pair<double, std::size_t>> nearest_candidates(
    const EmbeddingDataset& dataset, std::span<const float> query, std::size_t k,
    std::size_t exclude = no_index, const std::function<bool(int)>* label_filter = nullptr);

}  // namespace nnklab
