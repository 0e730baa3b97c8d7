#pragma once
// k-means machinery behind the two cluster-based reliability estimators:
// per-class centroids with hard labels (supervised) and global centroids with
// empirical per-cluster label distributions (unsupervised soft clustering).

#include <cstdint>
#include <span>
#include <vector>

#include "nnklab/dataset.hpp"

namespace nnklab {

struct KMeansParams {
  std::size_t max_iter = 300;
  double tol = 1e-6;  // relative centroid shift
};

struct KMeansResult {
  std::size_t dim = 0;
  std::vector<float> centroids;             // M x dim
  std::vector<std::size_t> assignments;     // per point
  std::vector<std::size_t> member_counts;   // per centroid
  std::vector<double> objective_history;    // per-iteration sum of squared distances
  std::size_t iterations = 0;
};

// Lloyd iterations with k-means++ seeding. Emptied centroids are reseeded to
// the point farthest from its assigned centroid, which keeps the centroid
// count fixed without breaking the objective's monotone descent.
KMeansResult kmeans(std::span<const float> points, std::size_t n, std::size_t dim, std::size_t m,
                    std::uint64_t seed, const KMeansParams& params = {});

enum class ClusterMode { supervised, unsupervised };

struct ClusterModel {
  ClusterMode mode = ClusterMode::supervised;
  std::size_t dim = 0;
  int num_classes = 0;
  std::vector<float> centroids;             // M x dim
  std::vector<int> hard_labels;             // supervised: per-centroid class
  std::vector<double> label_distributions;  // unsupervised: M x C, rows sum to 1
  std::vector<std::size_t> member_counts;

  std::size_t size() const { return member_counts.size(); }
  const float* centroid_ptr(std::size_t j) const { return centroids.data() + j * dim; }
};

// K_c centroids per class, fitted on each class's members independently.
ClusterModel fit_supervised(const EmbeddingDataset& dataset, std::size_t k_per_class,
                            std::uint64_t seed, const KMeansParams& params = {});

// M >= C label-agnostic centroids; each carries the empirical label
// distribution of its members.
ClusterModel fit_unsupervised(const EmbeddingDataset& dataset, std::size_t m, std::uint64_t seed,
                              const KMeansParams& params = {});

// Softmax over negative Euclidean distances (not squared) to all centroids,
// computed with max-shift stabilization. Entries are positive and sum to 1.
std::vector<double> softmax_weights(std::span<const float> query,
                                    std::span<const float> centroids, std::size_t m,
                                    std::size_t dim);

}  // namespace nnklab
