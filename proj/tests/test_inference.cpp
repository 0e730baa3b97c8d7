#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nnklab/inference.hpp"
#include "oracles.hpp"

using namespace nnklab;

namespace {

EmbeddingDataset labeled_rows(std::size_t n, std::size_t dim, const std::vector<std::int64_t>& labels,
                              std::uint64_t seed) {
  std::mt19937_64 g(seed);
  return make_dataset(oracles::random_unit_rows(g, n, dim), dim, labels);
}

NnkNeighborhood handmade(std::vector<std::size_t> idx, std::vector<double> w) {
  NnkNeighborhood nb;
  nb.neighbor_indices = std::move(idx);
  nb.weights = std::move(w);
  nb.raw_coefficients = nb.weights;
  nb.kernel_values.assign(nb.weights.size(), 1.0);
  return nb;
}

}  // namespace

TEST_CASE("weighted vote arithmetic") {
  const auto train = labeled_rows(3, 4, {0, 1, 1}, 1);
  const auto nb = handmade({0, 1, 2}, {0.5, 0.3, 0.2});
  const std::vector<double> scores = {0.2, 0.9, 0.9};
  // class 1 collects 0.3*0.9 + 0.2*0.9 = 0.45 against 0.10
  CHECK(vote_neighborhood(nb, train, scores, VoteMode::weighted) == 1);
  // unweighted: 1.8 against 0.2
  CHECK(vote_neighborhood(nb, train, scores, VoteMode::unweighted) == 1);
}

TEST_CASE("a single surviving neighbor decides regardless of its score") {
  const auto train = with_labels(labeled_rows(4, 3, {0, 1, 2, 0}, 2), {2, 0, 1, 2});
  const auto nb = handmade({3}, {1.0});
  const std::vector<double> scores = {0.5, 0.5, 0.5, 0.05};
  CHECK(vote_neighborhood(nb, train, scores, VoteMode::weighted) == 2);
  CHECK(vote_neighborhood(nb, train, scores, VoteMode::unweighted) == 2);
}

TEST_CASE("unanimous neighborhoods return the shared class") {
  const auto base = labeled_rows(6, 3, {0, 1, 2, 3, 4, 0}, 3);
  const auto train = with_labels(base, {4, 4, 4, 0, 1, 2});
  const auto nb = handmade({0, 1, 2}, {0.2, 0.5, 0.3});
  const std::vector<double> scores(6, 0.7);
  CHECK(vote_neighborhood(nb, train, scores, VoteMode::weighted) == 4);
}

TEST_CASE("vote ties resolve to the lowest class index") {
  const auto train = labeled_rows(3, 3, {0, 1, 2}, 4);
  const auto nb = handmade({1, 2}, {0.5, 0.5});
  const std::vector<double> scores = {1.0, 1.0, 1.0};
  // classes 1 and 2 tie exactly; the lower index wins
  CHECK(vote_neighborhood(nb, train, scores, VoteMode::weighted) == 1);
  CHECK(vote_neighborhood(nb, train, scores, VoteMode::unweighted) == 1);
}

TEST_CASE("zero vote mass falls back to nnk-weight majority") {
  const auto train = labeled_rows(3, 3, {0, 1, 1}, 5);
  const auto nb = handmade({0, 1, 2}, {0.6, 0.25, 0.15});
  const std::vector<double> scores = {0.0, 0.0, 0.0};
  CHECK(vote_neighborhood(nb, train, scores, VoteMode::weighted) == 0);
  CHECK(vote_neighborhood(nb, train, scores, VoteMode::unweighted) == 0);
}

TEST_CASE("input contract violations throw") {
  const auto train = labeled_rows(3, 3, {0, 1, 1}, 6);
  const NnkNeighborhood empty;
  const std::vector<double> scores = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(vote_neighborhood(empty, train, scores, VoteMode::weighted),
                  std::invalid_argument);
  const auto nb = handmade({0}, {1.0});
  const std::vector<double> short_scores = {1.0};
  CHECK_THROWS_AS(vote_neighborhood(nb, train, short_scores, VoteMode::weighted),
                  std::invalid_argument);

  ReliabilityVector rv;
  rv.scores = short_scores;
  const VoteConfig cfg{VoteMode::weighted, {1.0, 4}};
  CHECK_THROWS_AS(classify_weighted(train.row(0), train, rv, cfg), std::invalid_argument);
}

TEST_CASE("uniform reliability reduces to nnk majority / weight argmax") {
  std::mt19937_64 g(777);
  const std::size_t n = 80, dim = 5;
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::int64_t(g() % 4);
  for (int c = 0; c < 4; ++c) labels[std::size_t(c)] = c;
  const auto train = make_dataset(oracles::random_unit_rows(g, n, dim), dim, labels);

  ReliabilityVector ones;
  ones.scores.assign(n, 1.0);
  const VoteConfig cfg{VoteMode::weighted, {1.0, 12}};

  for (int t = 0; t < 60; ++t) {
    const auto q = oracles::random_unit_rows(g, 1, dim);
    const auto nb = build_neighborhood(train, {q.data(), dim}, cfg.kernel);

    // unweighted with scores==1 is a plain majority over the survivors
    std::vector<double> counts(4, 0.0), wsums(4, 0.0);
    for (std::size_t i = 0; i < nb.neighbor_indices.size(); ++i) {
      counts[std::size_t(train.labels[nb.neighbor_indices[i]])] += 1.0;
      wsums[std::size_t(train.labels[nb.neighbor_indices[i]])] += nb.weights[i];
    }
    int maj = 0, wmax = 0;
    for (int c = 1; c < 4; ++c) {
      if (counts[c] > counts[maj]) maj = c;
      if (wsums[c] > wsums[wmax]) wmax = c;
    }
    CHECK(classify_unweighted({q.data(), dim}, train, ones, cfg) == maj);
    CHECK(classify_weighted({q.data(), dim}, train, ones, cfg) == wmax);
  }
}

TEST_CASE("positive rescaling of scores never changes a prediction") {
  std::mt19937_64 g(31);
  const std::size_t n = 60, dim = 4;
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::int64_t(g() % 3);
  for (int c = 0; c < 3; ++c) labels[std::size_t(c)] = c;
  const auto train = make_dataset(oracles::random_unit_rows(g, n, dim), dim, labels);

  ReliabilityVector rv;
  rv.scores.resize(n);
  for (auto& s : rv.scores) s = double(g() >> 11) * 0x1.0p-53;
  const VoteConfig cfg{VoteMode::weighted, {1.0, 10}};

  for (double factor : {0.37, 8.0}) {
    ReliabilityVector scaled = rv;
    for (auto& s : scaled.scores) s *= factor;
    for (int t = 0; t < 25; ++t) {
      const auto q = oracles::random_unit_rows(g, 1, dim);
      CHECK(classify_weighted({q.data(), dim}, train, rv, cfg) ==
            classify_weighted({q.data(), dim}, train, scaled, cfg));
      CHECK(classify_unweighted({q.data(), dim}, train, rv, cfg) ==
            classify_unweighted({q.data(), dim}, train, scaled, cfg));
    }
  }
}

TEST_CASE("knn baseline majority") {
  // nearest three to the query carry labels 2, 2, 7 (classes renumbered densely)
  std::vector<float> vals = {0.f, 0.f, 0.1f, 0.f, 0.2f, 0.f, 5.f, 5.f};
  const auto train = make_dataset(vals, 2, {2, 2, 7, 0});
  const float q[2] = {0.05f, 0.f};
  CHECK(train.label_map[knn_baseline({q, 2}, train, 1)] == 2);
  CHECK(train.label_map[knn_baseline({q, 2}, train, 3)] == 2);
  CHECK_THROWS_AS(knn_baseline({q, 2}, train, 5), std::invalid_argument);
}

TEST_CASE("classification is deterministic") {
  std::mt19937_64 g(9);
  const std::size_t n = 40, dim = 4;
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::int64_t(i % 3);
  const auto train = make_dataset(oracles::random_unit_rows(g, n, dim), dim, labels);
  ReliabilityVector rv;
  rv.scores.assign(n, 0.5);
  const VoteConfig cfg{VoteMode::weighted, {1.0, 8}};
  const auto q = oracles::random_unit_rows(g, 1, dim);
  const int first = classify_weighted({q.data(), dim}, train, rv, cfg);
  for (int i = 0; i < 5; ++i)
    CHECK(classify_weighted({q.data(), dim}, train, rv, cfg) == first);
}
