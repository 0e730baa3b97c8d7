#pragma once
// Test-time classification: reliability-weighted voting over a query's NNK
// neighborhood, plus the plain k-NN majority baseline.

#include <span>

#include "nnklab/dataset.hpp"
#include "nnklab/geometry.hpp"
#include "nnklab/nnk.hpp"
#include "nnklab/reliability.hpp"

namespace nnklab {

enum class VoteMode { weighted, unweighted };

struct VoteConfig {
  VoteMode mode = VoteMode::weighted;
  KernelConfig kernel;
  // argmax ties always break to the lowest class index
};

// Vote over an already-built neighborhood. weighted: sum of
// nnk_weight * reliability per class; unweighted: sum of reliability per
// class. A zero total vote mass falls back to plain NNK-weight majority.
int vote_neighborhood(const NnkNeighborhood& neighborhood, const EmbeddingDataset& train,
                      std::span<const double> scores, VoteMode mode);

// argmax_c sum_i w_i * score_i * [y_i == c] over the query's NNK neighborhood.
int classify_weighted(std::span<const float> test_point, const EmbeddingDataset& train,
                      const ReliabilityVector& scores, const VoteConfig& config,
                      std::size_t exclude = no_index);

// argmax_c sum_i score_i * [y_i == c]; membership is still NNK-determined.
int classify_unweighted(std::span<const float> test_point, const EmbeddingDataset& train,
                        const ReliabilityVector& scores, const VoteConfig& config,
                        std::size_t exclude = no_index);

// Unweighted majority over the k nearest training rows.
int knn_baseline(std::span<const float> test_point, const EmbeddingDataset& train, std::size_t k,
                 std::size_t exclude = no_index);

// Majority over an already-selected neighbor index list.
int majority_label(std::span<const std::size_t> indices, const EmbeddingDataset& train);

}  // namespace nnklab
