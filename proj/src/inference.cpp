#include "nnklab/inference.hpp"

#include <stdexcept>
#include <vector>

namespace nnklab {

namespace {

int argmax_class(const std::vector<double>& votes) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c)
    if (votes[c] > votes[best]) best = c;  // strict: ties keep the lowest class
  return int(best);
}

void check_scores(const EmbeddingDataset& train, const ReliabilityVector& scores) {
  if (scores.scores.size() != train.rows)
    throw std::invalid_argument("classify: reliability vector has " +
                                std::to_string(scores.scores.size()) + " scores for " +
                                std::to_string(train.rows) + " training rows");
}

}  // namespace

int vote_neighborhood(const NnkNeighborhood& neighborhood, const EmbeddingDataset& train,
                      std::span<const double> scores, VoteMode mode) {
  if (neighborhood.neighbor_indices.empty())
    throw std::invalid_argument("vote_neighborhood: empty neighborhood");
  if (scores.size() != train.rows)
    throw std::invalid_argument("vote_neighborhood: score/train size mismatch");

  std::vector<double> votes(std::size_t(train.num_classes), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < neighborhood.neighbor_indices.size(); ++i) {
    const std::size_t idx = neighborhood.neighbor_indices[i];
    const double v = (mode == VoteMode::weighted ? neighborhood.weights[i] : 1.0) * scores[idx];
    votes[std::size_t(train.labels[idx])] += v;
    total += v;
  }
  if (total <= 0.0) {
    // All relevant reliabilities are zero; fall back to NNK-weight majority.
    votes.assign(votes.size(), 0.0);
    for (std::size_t i = 0; i < neighborhood.neighbor_indices.size(); ++i)
      votes[std::size_t(train.labels[neighborhood.neighbor_indices[i]])] +=
          neighborhood.weights[i];
  }
  return argmax_class(votes);
}

int classify_weighted(std::span<const float> test_point, const EmbeddingDataset& train,
                      const ReliabilityVector& scores, const VoteConfig& config,
                      std::size_t exclude) {
  check_scores(train, scores);
  const NnkNeighborhood nb = build_neighborhood(train, test_point, config.kernel, nullptr, exclude);
  return vote_neighborhood(nb, train, scores.scores, VoteMode::weighted);
}

int classify_unweighted(std::span<const float> test_point, const EmbeddingDataset& train,
                        const ReliabilityVector& scores, const VoteConfig& config,
                        std::size_t exclude) {
  check_scores(train, scores);
  const NnkNeighborhood nb = build_neighborhood(train, test_point, config.kernel, nullptr, exclude);
  return vote_neighborhood(nb, train, scores.scores, VoteMode::unweighted);
}

int majority_label(std::span<const std::size_t> indices, const EmbeddingDataset& train) {
  if (indices.empty()) throw std::invalid_argument("majority_label: empty neighbor set");
  std::vector<double> votes(std::size_t(train.num_classes), 0.0);
  for (std::size_t idx : indices) votes[std::size_t(train.labels[idx])] += 1.0;
  return argmax_class(votes);
}

int knn_baseline(std::span<const float> test_point, const EmbeddingDataset& train, std::size_t k,
                 std::size_t exclude) {
  const auto neighbors = knn_candidates(train, test_point, k, exclude);
  return majority_label(neighbors, train);
}

}  // namespace nnklab
