#include "nnklab/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nnklab/geometry.hpp"
#include "nnklab/rng.hpp"
#include "nnklab/simd.hpp"

namespace nnklab {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

double frobenius(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// k-means++ seeding: first centroid uniform, the rest D^2-weighted.
std::vector<double> kmeanspp_init(std::span<const float> points, std::size_t n, std::size_t dim,
                                  std::size_t m, rng::Engine& g, std::vector<double>& best_d2) {
  std::vector<double> centroids(m * dim);
  const std::size_t first = rng::uniform_index(g, n);
  for (std::size_t d = 0; d < dim; ++d) centroids[d] = double(points[first * dim + d]);

  best_d2.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    best_d2[i] = simd::l2sq_mixed(points.data() + i * dim, centroids.data(), dim);

  for (std::size_t c = 1; c < m; ++c) {
    double sum = 0.0;
    for (double v : best_d2) sum += v;
    std::size_t pick;
    if (sum <= 0.0) {
      pick = rng::uniform_index(g, n);  // all mass on duplicates; any point works
    } else {
      const double r = rng::uniform01(g) * sum;
      double cum = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += best_d2[i];
        if (r <= cum) {
          pick = i;
          break;
        }
      }
    }
    double* row = centroids.data() + c * dim;
    for (std::size_t d = 0; d < dim; ++d) row[d] = double(points[pick * dim + d]);
    for (std::size_t i = 0; i < n; ++i)
      best_d2[i] = std::min(best_d2[i], simd::l2sq_mixed(points.data() + i * dim, row, dim));
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(std::span<const float> points, std::size_t n, std::size_t dim, std::size_t m,
                    std::uint64_t seed, const KMeansParams& params) {
  if (dim == 0 || n == 0) fail("kmeans: empty input");
  if (points.size() != n * dim) fail("kmeans: point buffer size mismatch");
  if (m < 1 || m > n)
    fail("kmeans: m=" + std::to_string(m) + " outside [1, " + std::to_string(n) + "]");
  if (params.max_iter < 1 || !(params.tol > 0.0)) fail("kmeans: invalid iteration parameters");
  for (float v : points)
    if (!std::isfinite(v)) fail("kmeans: non-finite input");

  rng::Engine g(seed);
  std::vector<double> point_d2;
  std::vector<double> centroids = kmeanspp_init(points, n, dim, m, g, point_d2);

  KMeansResult res;
  res.dim = dim;
  res.assignments.assign(n, 0);
  res.member_counts.assign(m, 0);

  auto assign = [&]() {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const float* p = points.data() + i * dim;
      std::size_t best = 0;
      double best_d = simd::l2sq_mixed(p, centroids.data(), dim);
      for (std::size_t j = 1; j < m; ++j) {
        const double d = simd::l2sq_mixed(p, centroids.data() + j * dim, dim);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      res.assignments[i] = best;
      point_d2[i] = best_d;
      obj += best_d;
    }
    res.member_counts.assign(m, 0);
    for (std::size_t i = 0; i < n; ++i) res.member_counts[res.assignments[i]]++;
    return obj;
  };

  // Move each empty centroid onto the point currently farthest from its
  // assigned centroid. Empty centroids carry no cost, so the next assignment
  // pass can only lower the objective.
  auto repair_empties = [&](std::vector<double>& cent) {
    for (std::size_t j = 0; j < m; ++j) {
      if (res.member_counts[j] != 0) continue;
      std::size_t far = no_index;
      for (std::size_t i = 0; i < n; ++i) {
        if (point_d2[i] < 0.0) continue;  // already claimed by another repair
        if (far == no_index || point_d2[i] > point_d2[far]) far = i;
      }
      if (far == no_index) break;
      for (std::size_t d = 0; d < dim; ++d) cent[j * dim + d] = double(points[far * dim + d]);
      point_d2[far] = -1.0;
      res.member_counts[j] = 1;
    }
  };

  std::vector<double> sums(m * dim);
  std::vector<double> next(m * dim);
  for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
    res.objective_history.push_back(assign());
    res.iterations = iter + 1;

    sums.assign(m * dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      simd::add_to(sums.data() + res.assignments[i] * dim, points.data() + i * dim, dim);
    next = centroids;  // empty clusters keep their position until repaired
    for (std::size_t j = 0; j < m; ++j) {
      if (res.member_counts[j] == 0) continue;
      const double inv = 1.0 / double(res.member_counts[j]);
      for (std::size_t d = 0; d < dim; ++d) next[j * dim + d] = sums[j * dim + d] * inv;
    }
    repair_empties(next);

    double shift2 = 0.0;
    for (std::size_t t = 0; t < next.size(); ++t) {
      const double d = next[t] - centroids[t];
      shift2 += d * d;
    }
    const double rel_shift = std::sqrt(shift2) / (1.0 + frobenius(centroids));
    centroids.swap(next);
    if (rel_shift < params.tol) break;
  }

  // Sync assignments with the final centroids; clear any residual empties.
  res.objective_history.push_back(assign());
  for (std::size_t round = 0; round < m; ++round) {
    bool any_empty = false;
    for (std::size_t j = 0; j < m; ++j) any_empty |= (res.member_counts[j] == 0);
    if (!any_empty) break;
    repair_empties(centroids);
    res.objective_history.push_back(assign());
  }

  res.centroids.resize(m * dim);
  for (std::size_t t = 0; t < centroids.size(); ++t) res.centroids[t] = float(centroids[t]);
  return res;
}

ClusterModel fit_supervised(const EmbeddingDataset& dataset, std::size_t k_per_class,
                            std::uint64_t seed, const KMeansParams& params) {
  if (k_per_class < 1) fail("fit_supervised: k_per_class must be >= 1");
  const int c_count = dataset.num_classes;
  std::vector<std::vector<std::size_t>> members(c_count);
  for (std::size_t i = 0; i < dataset.rows; ++i) members[dataset.labels[i]].push_back(i);
  for (int c = 0; c < c_count; ++c) {
    if (members[c].size() < k_per_class)
      fail("fit_supervised: class " + std::to_string(c) + " has " +
           std::to_string(members[c].size()) + " members, needs >= " +
           std::to_string(k_per_class));
  }

  ClusterModel model;
  model.mode = ClusterMode::supervised;
  model.dim = dataset.dim;
  model.num_classes = c_count;
  std::vector<float> buffer;
  for (int c = 0; c < c_count; ++c) {
    buffer.resize(members[c].size() * dataset.dim);
    for (std::size_t s = 0; s < members[c].size(); ++s) {
      const float* r = dataset.row_ptr(members[c][s]);
      std::copy(r, r + dataset.dim, buffer.data() + s * dataset.dim);
    }
    // Same seed for every class: results do not depend on class numbering.
    const KMeansResult res = kmeans(buffer, members[c].size(), dataset.dim, k_per_class, seed, params);
    model.centroids.insert(model.centroids.end(), res.centroids.begin(), res.centroids.end());
    model.member_counts.insert(model.member_counts.end(), res.member_counts.begin(),
                               res.member_counts.end());
    model.hard_labels.insert(model.hard_labels.end(), k_per_class, c);
  }
  return model;
}

ClusterModel fit_unsupervised(const EmbeddingDataset& dataset, std::size_t m, std::uint64_t seed,
                              const KMeansParams& params) {
  if (m < std::size_t(dataset.num_classes))
    fail("fit_unsupervised: m must be >= number of classes");
  if (m > dataset.rows) fail("fit_unsupervised: m must be <= number of samples");

  const KMeansResult res = kmeans(dataset.values, dataset.rows, dataset.dim, m, seed, params);
  ClusterModel model;
  model.mode = ClusterMode::unsupervised;
  model.dim = dataset.dim;
  model.num_classes = dataset.num_classes;
  model.centroids = res.centroids;
  model.member_counts = res.member_counts;

  const std::size_t c_count = std::size_t(dataset.num_classes);
  model.label_distributions.assign(m * c_count, 0.0);
  for (std::size_t i = 0; i < dataset.rows; ++i)
    model.label_distributions[res.assignments[i] * c_count + std::size_t(dataset.labels[i])] += 1.0;
  for (std::size_t j = 0; j < m; ++j) {
    double* row = model.label_distributions.data() + j * c_count;
    if (model.member_counts[j] == 0) {
      // Unreachable with repair in place; keep the row stochastic regardless.
      for (std::size_t c = 0; c < c_count; ++c) row[c] = 1.0 / double(c_count);
      continue;
    }
    const double inv = 1.0 / double(model.member_counts[j]);
    for (std::size_t c = 0; c < c_count; ++c) row[c] *= inv;
  }
  return model;
}

std::vector<double> softmax_weights(std::span<const float> query, std::span<const float> centroids,
                                    std::size_t m, std::size_t dim) {
  if (m < 1) fail("softmax_weights: need at least one centroid");
  if (centroids.size() != m * dim || query.size() != dim)
    fail("softmax_weights: shape mismatch");
  std::vector<double> dist(m);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    dist[j] = std::sqrt(simd::l2sq(query.data(), centroids.data() + j * dim, dim));
    if (!std::isfinite(dist[j])) fail("softmax_weights: non-finite distance");
    dmin = std::min(dmin, dist[j]);
  }
  std::vector<double> w(m);
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    w[j] = std::exp(-(dist[j] - dmin));
    sum += w[j];
  }
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace nnklab
