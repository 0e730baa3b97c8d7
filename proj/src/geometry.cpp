#include "nnklab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nnklab/simd.hpp"

namespace nnklab {

double default_sigma(std::size_t dim) { return 100.0 * std::sqrt(double(dim)); }

KernelConfig resolve_kernel_config(KernelConfig config, std::size_t dim) {
  if (config.sigma <= 0.0) config.sigma = default_sigma(dim);
  if (!(config.sigma > 0.0)) throw std::invalid_argument("kernel config: sigma must be positive");
  if (config.k_init < 1) throw std::invalid_argument("kernel config: k_init must be >= 1");
  return config;
}

double euclidean_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("euclidean_distance: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  return std::sqrt(simd::l2sq(a.data(), b.data(), a.size()));
}

double gaussian_kernel_from_d2(double squared_distance, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  return std::exp(-squared_distance / (2.0 * sigma * sigma));
}

double gaussian_kernel(std::span<const float> a, std::span<const float> b, double sigma) {
  if (a.size() != b.size()) throw std::invalid_argument("gaussian_kernel: dimension mismatch");
  return gaussian_kernel_from_d2(simd::l2sq(a.data(), b.data(), a.size()), sigma);
}

std::vector<std::pair<double, std::size_t>> nearest_candidates(
    const EmbeddingDataset& dataset, std::span<const float> query, std::size_t k,
    std::size_t exclude, const std::function<bool(int)>* label_filter) {
  if (query.size() != dataset.dim)
    throw std::invalid_argument("nearest_candidates: query dimension mismatch");
  std::vector<std::pair<double, std::size_t>> pool;
  pool.reserve(dataset.rows);
  for (std::size_t i = 0; i < dataset.rows; ++i) {
    if (i == exclude) continue;
    if (label_filter && !(*label_filter)(dataset.labels[i])) continue;
    pool.emplace_back(simd::l2sq(query.data(), dataset.row_ptr(i), dataset.dim), i);
  }
  if (k > pool.size()) k = pool.size();
  // pair comparison orders by distance, then index: deterministic tie-breaks
  std::partial_sort(pool.begin(), pool.begin() + std::ptrdiff_t(k), pool.end());
  pool.resize(k);
  return pool;
}

std::vector<std::size_t> knn_candidates(const EmbeddingDataset& dataset,
                                        std::span<const float> query, std::size_t k,
                                        std::size_t exclude) {
  const std::size_t pool = dataset.rows - (exclude < dataset.rows ? 1 : 0);
  if (k < 1 || k > pool)
    throw std::invalid_argument("knn_candidates: k=" + std::to_string(k) +
                                " outside available pool of " + std::to_string(pool));
  auto hits = nearest_candidates(dataset, query, k, exclude);
  std::vector<std::size_t> indices(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) indices[i] = hits[i].second;
  return indices;
}

}  // namespace nnklab
