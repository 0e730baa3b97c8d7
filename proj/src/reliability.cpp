#include "nnklab/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "nnklab/hash.hpp"
#include "nnklab/nnk.hpp"
#include "nnklab/parallel.hpp"
#include "nnklab/simd.hpp"

namespace nnklab {

namespace {

std::uint64_t fingerprint(ReliabilityMethod m, const std::string& params) {
  return fnv1a64(std::string(method_name(m)) + "|" + params);
}

std::string kernel_params(const KernelConfig& cfg) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "sigma=%.17g,k_init=%zu", cfg.sigma, cfg.k_init);
  return buf;
}

}  // namespace

const char* method_name(ReliabilityMethod m) {
  switch (m) {
    case ReliabilityMethod::knn: return "knn";
    case ReliabilityMethod::nnk_weights: return "nnk_weights";
    case ReliabilityMethod::nnk_diam_ratio: return "nnk_diam_ratio";
    case ReliabilityMethod::kmeans_supervised: return "kmeans_sup";
    case ReliabilityMethod::kmeans_unsupervised: return "kmeans_unsup";
  }
  return "unknown";
}

ReliabilityVector knn_reliability(const EmbeddingDataset& dataset, std::size_t k) {
  if (k < 1 || k > dataset.rows - 1)
    throw std::invalid_argument("knn_reliability: k=" + std::to_string(k) +
                                " outside [1, N-1] with N=" + std::to_string(dataset.rows));
  ReliabilityVector rv;
  rv.method = ReliabilityMethod::knn;
  rv.config_fingerprint = fingerprint(rv.method, "k=" + std::to_string(k));
  rv.scores.resize(dataset.rows);
  parallel_for(dataset.rows, [&](std::size_t q) {
    const auto hits = nearest_candidates(dataset, dataset.row(q), k, q);
    std::size_t same = 0;
    for (const auto& [d2, idx] : hits) same += (dataset.labels[idx] == dataset.labels[q]);
    rv.scores[q] = double(same) / double(k);
  });
  return rv;
}

ReliabilityVector nnk_weights_reliability(const EmbeddingDataset& dataset,
                                          const KernelConfig& config) {
  const KernelConfig cfg = resolve_kernel_config(config, dataset.dim);
  ReliabilityVector rv;
  rv.method = ReliabilityMethod::nnk_weights;
  rv.config_fingerprint = fingerprint(rv.method, kernel_params(cfg));
  rv.scores.resize(dataset.rows);
  parallel_for(dataset.rows, [&](std::size_t q) {
    const NnkNeighborhood nb =
        build_neighborhood(dataset, dataset.row(q), cfg, nullptr, q, dataset.ids[q]);
    double score = 0.0;
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < nb.neighbor_indices.size(); ++i) {
      if (dataset.labels[nb.neighbor_indices[i]] == dataset.labels[q])
        score += nb.weights[i];
      else
        ++mismatches;
    }
    // a unanimous neighborhood scores exactly 1, not 1 minus rounding residue
    rv.scores[q] = mismatches == 0 ? 1.0 : std::clamp(score, 0.0, 1.0);
  });
  return rv;
}

ReliabilityVector nnk_diameter_ratio_reliability(const EmbeddingDataset& dataset,
                                                 const KernelConfig& config) {
  const KernelConfig cfg = resolve_kernel_config(config, dataset.dim);
  ReliabilityVector rv;
  rv.method = ReliabilityMethod::nnk_diam_ratio;
  rv.config_fingerprint = fingerprint(rv.method, kernel_params(cfg));
  rv.scores.resize(dataset.rows);

  std::vector<std::size_t> class_counts(std::size_t(dataset.num_classes), 0);
  for (int l : dataset.labels) class_counts[std::size_t(l)]++;

  parallel_for(dataset.rows, [&](std::size_t q) {
    const int label = dataset.labels[q];
    const NnkNeighborhood all =
        build_neighborhood(dataset, dataset.row(q), cfg, nullptr, q, dataset.ids[q]);
    const double diam_all = polytope_diameter(dataset, all.neighbor_indices);

    if (class_counts[std::size_t(label)] < 2) {  // no same-label candidate besides q
      if (diam_all == 0.0) {
        bool pure = true;
        for (std::size_t idx : all.neighbor_indices) pure &= (dataset.labels[idx] == label);
        rv.scores[q] = pure ? 1.0 : 0.0;
      } else {
        rv.scores[q] = 0.0;
      }
      return;
    }

    const std::function<bool(int)> same_label = [label](int l) { return l == label; };
    const NnkNeighborhood own =
        build_neighborhood(dataset, dataset.row(q), cfg, &same_label, q, dataset.ids[q]);
    const double diam_own = polytope_diameter(dataset, own.neighbor_indices);

    if (diam_own == 0.0) {
      if (diam_all == 0.0) {
        bool pure = true;
        for (std::size_t idx : all.neighbor_indices) pure &= (dataset.labels[idx] == label);
        rv.scores[q] = pure ? 1.0 : 0.0;
      } else {
        rv.scores[q] = 0.0;
      }
      return;
    }
    rv.scores[q] = std::clamp(diam_all / diam_own, 0.0, 1.0);
  });
  return rv;
}

ReliabilityVector supervised_kmeans_reliability(const EmbeddingDataset& dataset,
                                                const ClusterModel& model) {
  if (model.mode != ClusterMode::supervised)
    throw std::invalid_argument("supervised_kmeans_reliability: model is not supervised");
  if (model.dim != dataset.dim)
    throw std::invalid_argument("supervised_kmeans_reliability: dimension mismatch");
  ReliabilityVector rv;
  rv.method = ReliabilityMethod::kmeans_supervised;
  rv.config_fingerprint = fingerprint(rv.method, "m=" + std::to_string(model.size()));
  rv.scores.resize(dataset.rows);
  parallel_for(dataset.rows, [&](std::size_t q) {
    const auto w = softmax_weights(dataset.row(q), model.centroids, model.size(), model.dim);
    double best = 0.0;
    for (std::size_t j = 0; j < model.size(); ++j)
      if (model.hard_labels[j] == dataset.labels[q]) best = std::max(best, w[j]);
    rv.scores[q] = best;
  });
  return rv;
}

ReliabilityVector unsupervised_kmeans_reliability(const EmbeddingDataset& dataset,
                                                  const ClusterModel& model) {
  if (model.mode != ClusterMode::unsupervised)
    throw std::invalid_argument("unsupervised_kmeans_reliability: model is not unsupervised");
  if (model.dim != dataset.dim)
    throw std::invalid_argument("unsupervised_kmeans_reliability: dimension mismatch");
  ReliabilityVector rv;
  rv.method = ReliabilityMethod::kmeans_unsupervised;
  rv.config_fingerprint = fingerprint(rv.method, "m=" + std::to_string(model.size()));
  rv.scores.resize(dataset.rows);
  const std::size_t c_count = std::size_t(model.num_classes);
  parallel_for(dataset.rows, [&](std::size_t q) {
    const float* row = dataset.row_ptr(q);
    std::size_t nearest = 0;
    double best_d2 = simd::l2sq(row, model.centroid_ptr(0), model.dim);
    for (std::size_t j = 1; j < model.size(); ++j) {
      const double d2 = simd::l2sq(row, model.centroid_ptr(j), model.dim);
      if (d2 < best_d2) {  // strict: nearest-centroid ties go to the lowest index
        best_d2 = d2;
        nearest = j;
      }
    }
    const auto w = softmax_weights(dataset.row(q), model.centroids, model.size(), model.dim);
    const double p = model.label_distributions[nearest * c_count + std::size_t(dataset.labels[q])];
    rv.scores[q] = std::clamp(w[nearest] * p, 0.0, 1.0);
  });
  return rv;
}

void write_reliability_csv(const std::string& path, const EmbeddingDataset& dataset,
                           const ReliabilityVector& scores) {
  if (scores.scores.size() != dataset.rows)
    throw std::invalid_argument("write_reliability_csv: score/dataset size mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_reliability_csv: cannot open '" + path + "'");
  out << "id,score,method\n";
  char buf[64];
  for (std::size_t i = 0; i < dataset.rows; ++i) {
    std::snprintf(buf, sizeof buf, "%.9g", scores.scores[i]);
    out << dataset.ids[i] << ',' << buf << ',' << method_name(scores.method) << "\n";
  }
  if (!out.good()) throw std::runtime_error("write_reliability_csv: write failed on '" + path + "'");
}

}  // namespace nnklab
