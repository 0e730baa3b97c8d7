#pragma once
// Experiment engine: sweeps (method x voting x noise kind x rate) cells over
// seeded runs, producing accuracy mean/std reports plus CSV/JSON/SVG output.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nnklab/clustering.hpp"
#include "nnklab/dataset.hpp"
#include "nnklab/geometry.hpp"
#include "nnklab/noise.hpp"

namespace nnklab {

enum class VotingSelection { weighted, unweighted, both };

struct NoiseGrid {
  NoiseKind kind = NoiseKind::symmetric;
  std::vector<double> rates;
};

// Method tokens: knn, nnk_weights, nnk_diam_ratio, kmeans_sup, kmeans_unsup
// (reliability estimators, swept over voting modes) and knn_baseline (plain
// majority vote, no voting dimension).
extern const std::vector<std::string> kAllMethods;

struct ExperimentConfig {
  std::vector<std::string> methods;  // empty -> kAllMethods
  VotingSelection voting = VotingSelection::both;
  std::vector<NoiseGrid> grids;      // empty -> symmetric {0, 0.2, 0.4, 0.6}
  std::size_t runs = 5;
  std::uint64_t base_seed = 0;
  KernelConfig kernel;               // sigma <= 0 resolved as 100*sqrt(dim)
  std::size_t k_per_class = 1;       // supervised centroids per class
  std::size_t m_clusters = 0;        // unsupervised centroids; 0 -> 3*C
  std::map<int, int> asym_mapping;   // empty -> 10-class default when C == 10
  bool train_accuracy = false;       // also score the train split against clean labels
  KMeansParams kmeans;
};

struct CellResult {
  std::string method;
  std::string voting;      // "weighted" | "unweighted" | "none"
  std::string noise_kind;  // "symmetric" | "asymmetric"
  double rate = 0.0;
  double acc_mean = 0.0;
  double acc_std = 0.0;
  std::vector<double> run_accuracies;
  std::vector<double> train_run_accuracies;  // empty unless requested
  double train_acc_mean = 0.0;
  double train_acc_std = 0.0;
  double seconds = 0.0;
};

struct ExperimentReport {
  std::uint64_t config_fingerprint = 0;
  std::size_t runs = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> run_seeds;
  std::vector<std::int64_t> train_label_map;  // dense class id -> original label value
  std::vector<CellResult> cells;
};

bool operator==(const CellResult& a, const CellResult& b);
bool operator==(const ExperimentReport& a, const ExperimentReport& b);

// Runs the full grid. Per run r the seed base_seed + r drives noise
// injection and k-means initialization; estimators are refit on the noisy
// labels of each run. Deterministic given the config and datasets.
ExperimentReport run_experiment(const EmbeddingDataset& train, const EmbeddingDataset& test,
                                const ExperimentConfig& config);

enum class ReportFormat { csv, svg, json };

// Writes report.csv / report.json / one accuracy_<kind>.svg per noise kind
// (solid lines weighted, dashed unweighted) into `directory`. Returns the
// files written. An empty format set is an error.
std::vector<std::string> emit_report(const ExperimentReport& report, const std::string& directory,
                                     const std::set<ReportFormat>& formats);

ExperimentReport load_report_json(const std::string& path);

// C Gaussian blobs with unit-variance components whose class means are at
// least `separation` apart, rows L2-normalized, split into disjoint
// train/test halves per class.
std::pair<EmbeddingDataset, EmbeddingDataset> generate_synthetic(int num_classes,
                                                                 std::size_t per_class,
                                                                 std::size_t dim,
                                                                 double separation,
                                                                 std::uint64_t seed);

}  // namespace nnklab
