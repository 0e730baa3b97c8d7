#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nnklab/nnk.hpp"
#include "oracles.hpp"

using namespace nnklab;

namespace {

EmbeddingDataset planar(const std::vector<std::pair<float, float>>& pts,
                        const std::vector<std::int64_t>& labels) {
  std::vector<float> vals;
  for (auto [x, y] : pts) {
    vals.push_back(x);
    vals.push_back(y);
  }
  return make_dataset(vals, 2, labels);
}

double naive_diameter(const EmbeddingDataset& ds, const std::vector<std::size_t>& idx) {
  double best = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) {
      double s = 0.0;
      for (std::size_t d = 0; d < ds.dim; ++d) {
        const double diff = double(ds.row_ptr(idx[a])[d]) - double(ds.row_ptr(idx[b])[d]);
        s += diff * diff;
      }
      best = std::max(best, std::sqrt(s));
    }
  return best;
}

}  // namespace

TEST_CASE("single candidate closed form") {
  const std::vector<double> kss = {1.0}, ksq = {0.5};
  const auto theta = solve_nnk_coefficients(kss, ksq);
  CHECK(theta.size() == 1);
  CHECK(theta[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("solver matches exhaustive enumeration on random programs") {
  std::mt19937_64 g(101);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 1 + std::size_t(g() % 12);
    const std::size_t dim = 8;
    const auto rows = oracles::random_unit_rows(g, k, dim);
    const auto query = oracles::random_unit_rows(g, 1, dim);
    std::vector<double> kss, ksq;
    oracles::gaussian_program(rows, k, dim, query, 1.0, kss, ksq);

    const auto mine = solve_nnk_coefficients(kss, ksq);
    const auto expect = oracles::nnk_enumerate(kss, ksq);
    for (std::size_t i = 0; i < k; ++i) CHECK(std::abs(mine[i] - expect[i]) <= 1e-6);
    CHECK(nnk_kkt_residual(kss, ksq, mine) <= 1e-6);
  }
}

TEST_CASE("duplicate candidates put all mass on the lowest index") {
  // candidates 0 and 1 are the same point; 2 sits farther away
  const double c01 = 0.9, cq = 0.8, c2 = 0.3, cq2 = 0.25;
  const std::vector<double> kss = {1.0, c01, c2,  //
                                   c01, 1.0, c2,  //
                                   c2, c2, 1.0};
  // exact duplicates share kernel values; write them so rows 0/1 coincide
  std::vector<double> dup = kss;
  dup[0 * 3 + 1] = dup[1 * 3 + 0] = 1.0;  // kernel(x0, x1) = 1 for identical points
  const std::vector<double> ksq = {cq, cq, cq2};
  const auto theta = solve_nnk_coefficients(dup, ksq);
  CHECK(theta[0] > 0.0);
  CHECK(theta[1] == 0.0);
  const auto expect = oracles::nnk_enumerate(dup, ksq);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(theta[i] - expect[i]) <= 1e-6);
}

TEST_CASE("invalid programs are rejected") {
  const std::vector<double> skew = {1.0, 0.5, 0.1, 1.0};
  const std::vector<double> rhs = {0.5, 0.5};
  CHECK_THROWS_AS(solve_nnk_coefficients(skew, rhs), std::invalid_argument);  // not symmetric
  const double nan = std::nan("");
  const std::vector<double> bad = {1.0, nan, nan, 1.0};
  CHECK_THROWS_AS(solve_nnk_coefficients(bad, rhs), std::invalid_argument);
  const std::vector<double> empty;
  CHECK_THROWS_AS(solve_nnk_coefficients(empty, empty), std::invalid_argument);
  const std::vector<double> one = {1.0};
  CHECK_THROWS_AS(solve_nnk_coefficients(one, rhs), std::invalid_argument);
}

TEST_CASE("midpoint between two mirrored candidates splits weights evenly") {
  const auto ds = planar({{-1.f, 0.f}, {1.f, 0.f}}, {0, 1});
  const float q[2] = {0.f, 0.f};
  const KernelConfig cfg{1.0, 50};
  const auto nb = build_neighborhood(ds, {q, 2}, cfg);
  REQUIRE(nb.neighbor_indices.size() == 2);
  CHECK(nb.weights[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(nb.weights[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(nb.weights[0] + nb.weights[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("occluded candidate is pruned") {
  // candidate 1 sits directly behind candidate 0 from the query's viewpoint
  const auto ds = planar({{1.f, 0.f}, {2.f, 0.f}, {0.f, 5.f}}, {0, 1, 0});
  const float q[2] = {0.f, 0.f};
  const KernelConfig cfg{1.0, 2};  // pool = the two collinear points
  const auto nb = build_neighborhood(ds, {q, 2}, cfg);
  REQUIRE(nb.neighbor_indices.size() == 1);
  CHECK(nb.neighbor_indices[0] == 0);
  CHECK(nb.weights[0] == 1.0);
}

TEST_CASE("lone nearby cluster of identical points collapses to one neighbor") {
  const auto ds = planar({{3.f, 3.f}, {3.f, 3.f}, {3.f, 3.f}, {40.f, 40.f}}, {0, 0, 0, 1});
  const float q[2] = {2.f, 2.f};
  const KernelConfig cfg{1.0, 3};
  const auto nb = build_neighborhood(ds, {q, 2}, cfg);
  REQUIRE(nb.neighbor_indices.size() == 1);
  CHECK(nb.neighbor_indices[0] == 0);  // lowest index among the duplicates
  CHECK(nb.weights[0] == 1.0);
}

TEST_CASE("neighborhood weights form a distribution and satisfy KKT") {
  std::mt19937_64 g(7);
  const std::size_t n = 90, dim = 5;
  const auto rows = oracles::random_unit_rows(g, n, dim);
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::int64_t(i % 3);
  const auto ds = make_dataset(rows, dim, labels);
  const KernelConfig cfg{1.0, 15};

  for (std::size_t q = 0; q < 25; ++q) {
    const auto nb = build_neighborhood(ds, ds.row(q), cfg, nullptr, q, std::int64_t(q));
    REQUIRE(!nb.neighbor_indices.empty());
    CHECK(nb.neighbor_indices.size() <= cfg.k_init);
    double sum = 0.0;
    for (double w : nb.weights) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    for (std::size_t idx : nb.neighbor_indices) CHECK(idx != q);

    // rebuild the full program over the candidate pool and check KKT with the
    // solver's raw coefficients in place
    const auto cands = nearest_candidates(ds, ds.row(q), cfg.k_init, q);
    std::vector<float> cand_rows;
    for (const auto& [d2, idx] : cands)
      cand_rows.insert(cand_rows.end(), ds.row_ptr(idx), ds.row_ptr(idx) + dim);
    std::vector<float> query(ds.row_ptr(q), ds.row_ptr(q) + dim);
    std::vector<double> kss, ksq;
    oracles::gaussian_program(cand_rows, cands.size(), dim, query, cfg.sigma, kss, ksq);
    std::vector<double> theta(cands.size(), 0.0);
    for (std::size_t t = 0; t < nb.neighbor_indices.size(); ++t) {
      for (std::size_t c = 0; c < cands.size(); ++c)
        if (cands[c].second == nb.neighbor_indices[t]) theta[c] = nb.raw_coefficients[t];
    }
    CHECK(nnk_kkt_residual(kss, ksq, theta) <= 1e-6);
  }
}

TEST_CASE("appending a duplicate of a surviving neighbor changes nothing distinct") {
  std::mt19937_64 g(23);
  // k_init exceeds the point count so the duplicate joins the pool instead of
  // evicting the farthest candidate
  const std::size_t n = 12, dim = 4;
  const auto rows = oracles::random_unit_rows(g, n, dim);
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::int64_t(i % 2);
  const auto ds = make_dataset(rows, dim, labels);
  const auto query = oracles::random_unit_rows(g, 1, dim);
  const KernelConfig cfg{1.0, 30};

  const auto before = build_neighborhood(ds, {query.data(), dim}, cfg);
  REQUIRE(!before.neighbor_indices.empty());
  const std::size_t survivor = before.neighbor_indices.front();

  std::vector<float> extended = rows;
  extended.insert(extended.end(), ds.row_ptr(survivor), ds.row_ptr(survivor) + dim);
  std::vector<std::int64_t> ext_labels = labels;
  ext_labels.push_back(labels[survivor]);
  const auto ds2 = make_dataset(extended, dim, ext_labels);
  const auto after = build_neighborhood(ds2, {query.data(), dim}, cfg);

  auto point_set = [&](const EmbeddingDataset& d, const std::vector<std::size_t>& idx) {
    std::vector<std::vector<float>> pts;
    for (std::size_t i : idx)
      pts.emplace_back(d.row_ptr(i), d.row_ptr(i) + d.dim);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  };
  CHECK(point_set(ds, before.neighbor_indices) == point_set(ds2, after.neighbor_indices));
}

TEST_CASE("identical inputs give identical neighborhoods") {
  std::mt19937_64 g(5);
  const auto rows = oracles::random_unit_rows(g, 30, 6);
  std::vector<std::int64_t> labels(30);
  for (std::size_t i = 0; i < 30; ++i) labels[i] = std::int64_t(i % 3);
  const auto ds = make_dataset(rows, 6, labels);
  const KernelConfig cfg{2.0, 12};
  const auto a = build_neighborhood(ds, ds.row(3), cfg, nullptr, 3);
  const auto b = build_neighborhood(ds, ds.row(3), cfg, nullptr, 3);
  CHECK(a.neighbor_indices == b.neighbor_indices);
  CHECK(a.weights == b.weights);
  CHECK(a.raw_coefficients == b.raw_coefficients);
  CHECK(a.kernel_values == b.kernel_values);
}

TEST_CASE("empty candidate pool is an error") {
  const auto ds = planar({{0.f, 0.f}, {1.f, 1.f}}, {0, 1});
  const float q[2] = {0.f, 0.f};
  const KernelConfig cfg{1.0, 5};
  const std::function<bool(int)> nothing = [](int) { return false; };
  CHECK_THROWS_AS(build_neighborhood(ds, {q, 2}, cfg, &nothing), std::runtime_error);
}

TEST_CASE("polytope diameter") {
  const auto ds = planar({{0.f, 0.f}, {3.f, 4.f}, {1.f, 1.f}}, {0, 1, 0});
  const std::vector<std::size_t> single = {2};
  CHECK(polytope_diameter(ds, single) == 0.0);
  const std::vector<std::size_t> pair = {0, 1};
  CHECK(polytope_diameter(ds, pair) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK_THROWS_AS(polytope_diameter(ds, std::vector<std::size_t>{}), std::invalid_argument);

  std::mt19937_64 g(77);
  const auto rows = oracles::random_unit_rows(g, 10, 7);
  std::vector<std::int64_t> labels(10);
  for (std::size_t i = 0; i < 10; ++i) labels[i] = std::int64_t(i % 2);
  const auto rds = make_dataset(rows, 7, labels);
  std::vector<std::size_t> all(10);
  for (std::size_t i = 0; i < 10; ++i) all[i] = i;
  CHECK(polytope_diameter(rds, all) == doctest::Approx(naive_diameter(rds, all)).epsilon(1e-12));
}
