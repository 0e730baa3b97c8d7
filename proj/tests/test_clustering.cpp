#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nnklab/clustering.hpp"
#include "nnklab/rng.hpp"
#include "oracles.hpp"

using namespace nnklab;

namespace {

std::vector<float> gaussian_blobs(std::mt19937_64& g, const std::vector<std::pair<double, double>>& means,
                                  std::size_t per_blob, double spread) {
  auto u01 = [&] { return double(g() >> 11) * 0x1.0p-53; };
  auto normal = [&] {
    const double u1 = 1.0 - u01(), u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };
  std::vector<float> pts;
  for (auto [mx, my] : means) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      pts.push_back(float(mx + spread * normal()));
      pts.push_back(float(my + spread * normal()));
    }
  }
  return pts;
}

}  // namespace

TEST_CASE("m equal to point count gives zero objective") {
  const std::vector<float> pts = {0.f, 0.f, 5.f, 0.f, 0.f, 5.f, 9.f, 9.f};
  const auto res = kmeans(pts, 4, 2, 4, 1);
  CHECK(res.objective_history.back() == 0.0);
  std::vector<std::size_t> sorted = res.assignments;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("two separated pairs land centroids on the pair locations") {
  const std::vector<float> pts = {0.f, 0.f, 0.f, 0.f, 10.f, 10.f, 10.f, 10.f};
  const auto res = kmeans(pts, 4, 2, 2, 3);
  CHECK(res.objective_history.back() == doctest::Approx(0.0));
  std::vector<std::pair<float, float>> cents = {{res.centroids[0], res.centroids[1]},
                                                {res.centroids[2], res.centroids[3]}};
  std::sort(cents.begin(), cents.end());
  CHECK(cents[0].first == doctest::Approx(0.0));
  CHECK(cents[1].first == doctest::Approx(10.0));
}

TEST_CASE("objective is within 1% of a 50-restart baseline") {
  std::mt19937_64 g(5);
  const auto pts = gaussian_blobs(g, {{0, 0}, {12, 0}, {0, 12}}, 67, 0.7);
  const std::size_t n = 201;
  const double mine = kmeans(pts, n, 2, 3, 0).objective_history.back();
  double best = mine;
  for (std::uint64_t seed = 1; seed <= 50; ++seed)
    best = std::min(best, kmeans(pts, n, 2, 3, seed).objective_history.back());
  CHECK(mine <= best * 1.01 + 1e-12);
}

TEST_CASE("objective never increases across iterations, clusters stay populated") {
  std::mt19937_64 g(9);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 30 + std::size_t(g() % 40);
    std::vector<float> pts(n * 3);
    for (auto& v : pts) v = float(double(g() >> 11) * 0x1.0p-53 * 8.0);
    const std::size_t m = 2 + std::size_t(g() % 9);
    const auto res = kmeans(pts, n, 3, std::min(m, n), seed);
    const double slack = 1e-9 * (1.0 + res.objective_history.front());
    for (std::size_t t = 1; t < res.objective_history.size(); ++t)
      CHECK(res.objective_history[t] <= res.objective_history[t - 1] + slack);
    std::size_t total = 0;
    for (std::size_t c : res.member_counts) {
      CHECK(c >= 1);
      total += c;
    }
    CHECK(total == n);
  }
}

TEST_CASE("kmeans input validation") {
  const std::vector<float> pts = {0.f, 0.f, 1.f, 1.f};
  CHECK_THROWS_AS(kmeans(pts, 2, 2, 3, 0), std::runtime_error);  // m > n
  const std::vector<float> bad = {0.f, std::nanf(""), 1.f, 1.f};
  CHECK_THROWS_AS(kmeans(bad, 2, 2, 1, 0), std::runtime_error);
}

TEST_CASE("same seed reproduces the same model bit for bit") {
  std::mt19937_64 g(31);
  std::vector<float> pts(80 * 4);
  for (auto& v : pts) v = float(double(g() >> 11) * 0x1.0p-53);
  const auto a = kmeans(pts, 80, 4, 6, 1234);
  const auto b = kmeans(pts, 80, 4, 6, 1234);
  CHECK(a.centroids == b.centroids);
  CHECK(a.assignments == b.assignments);
  CHECK(a.objective_history == b.objective_history);
}

TEST_CASE("supervised fit with one centroid per class returns class means") {
  const std::vector<float> vals = {0.f, 0.f, 2.f, 0.f,   // class 0
                                   10.f, 10.f, 12.f, 10.f};  // class 1
  const auto ds = make_dataset(vals, 2, {0, 0, 1, 1});
  const auto model = fit_supervised(ds, 1, 7);
  CHECK(model.mode == ClusterMode::supervised);
  CHECK(model.size() == 2);
  CHECK(model.hard_labels == std::vector<int>{0, 1});
  CHECK(model.centroids[0] == doctest::Approx(1.0));
  CHECK(model.centroids[1] == doctest::Approx(0.0));
  CHECK(model.centroids[2] == doctest::Approx(11.0));
}

TEST_CASE("supervised fit demands enough members per class") {
  const auto ds = make_dataset({0.f, 0.f, 1.f, 1.f, 2.f, 2.f}, 2, {0, 0, 1});
  CHECK_THROWS_WITH_AS(fit_supervised(ds, 2, 0), doctest::Contains("class 1"),
                       std::runtime_error);
}

TEST_CASE("supervised sub-blob recovery matches assignment enumeration") {
  // two classes, each two tight sub-blobs of two points
  const std::vector<float> vals = {
      0.f, 0.f, 0.f, 0.2f, 6.f, 0.f, 6.f, 0.2f,      // class 0 blobs at x=0 and x=6
      0.f, 20.f, 0.f, 20.2f, 6.f, 20.f, 6.f, 20.2f,  // class 1 blobs at x=0 and x=6
  };
  const auto ds = make_dataset(vals, 2, {0, 0, 0, 0, 1, 1, 1, 1});
  const auto model = fit_supervised(ds, 2, 11);

  // brute-force best 2-partition per class
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::array<double, 2>> pts;
    for (std::size_t i = 0; i < ds.rows; ++i)
      if (ds.labels[i] == cls)
        pts.push_back({double(ds.row_ptr(i)[0]), double(ds.row_ptr(i)[1])});
    double best_obj = 1e300;
    std::vector<std::array<double, 2>> best_means;
    for (unsigned mask = 1; mask < 15; ++mask) {  // proper non-empty bipartitions of 4
      std::array<double, 2> m0{0, 0}, m1{0, 0};
      int n0 = 0, n1 = 0;
      for (int i = 0; i < 4; ++i) {
        if (mask & (1u << i)) {
          m0[0] += pts[i][0];
          m0[1] += pts[i][1];
          ++n0;
        } else {
          m1[0] += pts[i][0];
          m1[1] += pts[i][1];
          ++n1;
        }
      }
      m0[0] /= n0;
      m0[1] /= n0;
      m1[0] /= n1;
      m1[1] /= n1;
      double obj = 0.0;
      for (int i = 0; i < 4; ++i) {
        const bool in0 = mask & (1u << i);
        const auto& m = in0 ? m0 : m1;
        obj += (pts[i][0] - m[0]) * (pts[i][0] - m[0]) + (pts[i][1] - m[1]) * (pts[i][1] - m[1]);
      }
      if (obj < best_obj) {
        best_obj = obj;
        best_means = {m0, m1};
      }
    }
    std::sort(best_means.begin(), best_means.end());
    std::vector<std::array<double, 2>> got;
    for (std::size_t j = 0; j < model.size(); ++j)
      if (model.hard_labels[j] == cls)
        got.push_back({double(model.centroid_ptr(j)[0]), double(model.centroid_ptr(j)[1])});
    std::sort(got.begin(), got.end());
    REQUIRE(got.size() == 2);
    for (int b = 0; b < 2; ++b) {
      CHECK(got[b][0] == doctest::Approx(best_means[b][0]).epsilon(1e-5));
      CHECK(got[b][1] == doctest::Approx(best_means[b][1]).epsilon(1e-5));
    }
  }
}

TEST_CASE("unsupervised soft labels count member fractions") {
  // blob A: 4 points, labels {0,0,1,1}; blob B: 4 points, all label 1
  std::vector<float> vals;
  std::vector<std::int64_t> labels;
  for (int i = 0; i < 4; ++i) {
    vals.push_back(0.f + 0.01f * float(i));
    vals.push_back(0.f);
    labels.push_back(i < 2 ? 0 : 1);
  }
  for (int i = 0; i < 4; ++i) {
    vals.push_back(50.f + 0.01f * float(i));
    vals.push_back(0.f);
    labels.push_back(1);
  }
  const auto ds = make_dataset(vals, 2, labels);
  const auto model = fit_unsupervised(ds, 2, 5);
  REQUIRE(model.size() == 2);
  std::size_t total = 0;
  for (std::size_t c : model.member_counts) total += c;
  CHECK(total == ds.rows);

  const std::size_t blob_a = model.centroid_ptr(0)[0] < 25.f ? 0 : 1;
  const std::size_t blob_b = 1 - blob_a;
  CHECK(model.label_distributions[blob_a * 2 + 0] == doctest::Approx(0.5));
  CHECK(model.label_distributions[blob_a * 2 + 1] == doctest::Approx(0.5));
  CHECK(model.label_distributions[blob_b * 2 + 0] == doctest::Approx(0.0));
  CHECK(model.label_distributions[blob_b * 2 + 1] == doctest::Approx(1.0));
  for (std::size_t j = 0; j < model.size(); ++j) {
    double row = 0.0;
    for (int c = 0; c < model.num_classes; ++c) row += model.label_distributions[j * 2 + c];
    CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("unsupervised fit validates the centroid count") {
  const auto ds = make_dataset({0.f, 0.f, 1.f, 1.f, 2.f, 2.f}, 2, {0, 1, 2});
  CHECK_THROWS_AS(fit_unsupervised(ds, 2, 0), std::runtime_error);  // m < C
  CHECK_THROWS_AS(fit_unsupervised(ds, 4, 0), std::runtime_error);  // m > N
}

TEST_CASE("softmax weights: uniform when equidistant") {
  const std::vector<float> cents = {1.f, 0.f, -1.f, 0.f, 0.f, 1.f, 0.f, -1.f};
  const float q[2] = {0.f, 0.f};
  const auto w = softmax_weights({q, 2}, cents, 4, 2);
  double sum = 0.0;
  for (double v : w) {
    CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax weights: closed form for distances (0, ln 3)") {
  const float ln3 = float(std::log(3.0));
  const std::vector<float> cents = {0.f, 0.f, ln3, 0.f};
  const float q[2] = {0.f, 0.f};
  const auto w = softmax_weights({q, 2}, cents, 2, 2);
  CHECK(w[0] == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(w[1] == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("softmax weights are shift invariant in the distances") {
  // centroids on the positive axis at x_j, then at x_j + c, query at origin
  const std::vector<double> base = {0.5, 1.25, 2.0, 3.5};
  const double shift = 4.75;
  std::vector<float> near, far;
  for (double x : base) {
    near.push_back(float(x));
    near.push_back(0.f);
    far.push_back(float(x + shift));
    far.push_back(0.f);
  }
  const float q[2] = {0.f, 0.f};
  const auto w1 = softmax_weights({q, 2}, near, base.size(), 2);
  const auto w2 = softmax_weights({q, 2}, far, base.size(), 2);
  for (std::size_t j = 0; j < base.size(); ++j)
    CHECK(w1[j] == doctest::Approx(w2[j]).epsilon(1e-9));
}
