#pragma once
// Per-training-sample reliability scores in [0,1]. Each estimator asks, for a
// sample with (possibly corrupted) label y_q, how strongly the embedding
// geometry supports that label. Local estimators look at nearest neighbors or
// NNK polytopes; global estimators compare against clustering structure.

#include <cstdint>
#include <string>
#include <vector>

#include "nnklab/clustering.hpp"
#include "nnklab/dataset.hpp"
#include "nnklab/geometry.hpp"

namespace nnklab {

enum class ReliabilityMethod {
  knn,
  nnk_weights,
  nnk_diam_ratio,
  kmeans_supervised,
  kmeans_unsupervised,
};

const char* method_name(ReliabilityMethod m);

struct ReliabilityVector {
  ReliabilityMethod method = ReliabilityMethod::knn;
  std::uint64_t config_fingerprint = 0;
  std::vector<double> scores;  // one per training sample, each in [0,1]
};

// Fraction of the k nearest neighbors (self excluded) sharing the sample's
// label.
ReliabilityVector knn_reliability(const EmbeddingDataset& dataset, std::size_t k);

// Sum of the sample's normalized NNK weights over same-label neighbors.
ReliabilityVector nnk_weights_reliability(const EmbeddingDataset& dataset,
                                          const KernelConfig& config);

// Ratio of the all-label NNK polytope diameter to the same-label-only NNK
// polytope diameter, clamped to [0,1]. When the same-label polytope is
// degenerate (fewer than two same-label candidates) the score is 0, unless
// the all-label polytope is also degenerate, in which case the score is 1
// when every surviving neighbor carries the sample's label and 0 otherwise.
ReliabilityVector nnk_diameter_ratio_reliability(const EmbeddingDataset& dataset,
                                                 const KernelConfig& config);

// Largest softmax distance weight among the centroids of the sample's class.
ReliabilityVector supervised_kmeans_reliability(const EmbeddingDataset& dataset,
                                                const ClusterModel& model);

// Softmax weight of the nearest centroid (ties to the lowest index) times
// that centroid's empirical probability of the sample's label.
ReliabilityVector unsupervised_kmeans_reliability(const EmbeddingDataset& dataset,
                                                  const ClusterModel& model);

// CSV export: id,score,method
void write_reliability_csv(const std::string& path, const EmbeddingDataset& dataset,
                           const ReliabilityVector& scores);

}  // namespace nnklab
