#include "nnklab/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "nnklab/hash.hpp"
#include "nnklab/inference.hpp"
#include "nnklab/nnk.hpp"
#include "nnklab/parallel.hpp"
#include "nnklab/reliability.hpp"
#include "nnklab/rng.hpp"
#include "nnklab/simd.hpp"
#include "nnklab/svg.hpp"

namespace nnklab {

const std::vector<std::string> kAllMethods = {
    "knn", "nnk_weights", "nnk_diam_ratio", "kmeans_sup", "kmeans_unsup", "knn_baseline"};

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

const char* kind_name(NoiseKind k) {
  return k == NoiseKind::symmetric ? "symmetric" : "asymmetric";
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= double(v.size());
  return {mean, std::sqrt(var)};
}

bool is_estimator(const std::string& token) { return token != "knn_baseline"; }

std::string canonical_config(const ExperimentConfig& cfg, const EmbeddingDataset& train,
                             const EmbeddingDataset& test, std::size_t m_clusters) {
  std::string s = "v1;train=" + std::to_string(train.rows) + "x" + std::to_string(train.dim) +
                  "c" + std::to_string(train.num_classes) + ";test=" + std::to_string(test.rows) +
                  ";runs=" + std::to_string(cfg.runs) + ";seed=" + std::to_string(cfg.base_seed) +
                  ";sigma=" + fmt("%.17g", cfg.kernel.sigma) +
                  ";k=" + std::to_string(cfg.kernel.k_init) +
                  ";kc=" + std::to_string(cfg.k_per_class) + ";m=" + std::to_string(m_clusters) +
                  ";kmeans=" + std::to_string(cfg.kmeans.max_iter) + "," +
                  fmt("%.17g", cfg.kmeans.tol) + ";train_acc=" +
                  (cfg.train_accuracy ? "1" : "0") + ";voting=" +
                  std::to_string(int(cfg.voting)) + ";methods=";
  for (const auto& m : cfg.methods) s += m + ",";
  s += ";grids=";
  for (const auto& g : cfg.grids) {
    s += std::string(kind_name(g.kind)) + ":";
    for (double r : g.rates) s += fmt("%.17g", r) + ",";
    s += ";";
  }
  s += "map=";
  for (const auto& [a, b] : cfg.asym_mapping)
    s += std::to_string(a) + ":" + std::to_string(b) + ",";
  return s;
}

struct CellPlan {
  std::string method;
  std::string voting;  // "weighted" | "unweighted" | "none"
  VoteMode mode = VoteMode::weighted;
};

}  // namespace

bool operator==(const CellResult& a, const CellResult& b) {
  return a.method == b.method && a.voting == b.voting && a.noise_kind == b.noise_kind &&
         a.rate == b.rate && a.acc_mean == b.acc_mean && a.acc_std == b.acc_std &&
         a.run_accuracies == b.run_accuracies &&
         a.train_run_accuracies == b.train_run_accuracies &&
         a.train_acc_mean == b.train_acc_mean && a.train_acc_std == b.train_acc_std &&
         a.seconds == b.seconds;
}

bool operator==(const ExperimentReport& a, const ExperimentReport& b) {
  return a.config_fingerprint == b.config_fingerprint && a.runs == b.runs &&
         a.base_seed == b.base_seed && a.run_seeds == b.run_seeds &&
         a.train_label_map == b.train_label_map && a.cells == b.cells;
}

ExperimentReport run_experiment(const EmbeddingDataset& train, const EmbeddingDataset& test,
                                const ExperimentConfig& config) {
  ExperimentConfig cfg = config;
  if (cfg.methods.empty()) cfg.methods = kAllMethods;
  for (const auto& m : cfg.methods)
    if (std::find(kAllMethods.begin(), kAllMethods.end(), m) == kAllMethods.end())
      fail("run_experiment: unknown method '" + m + "'");
  if (cfg.grids.empty()) cfg.grids = {{NoiseKind::symmetric, {0.0, 0.2, 0.4, 0.6}}};
  for (const auto& g : cfg.grids) {
    if (g.rates.empty()) fail("run_experiment: a noise grid has no rates");
    for (double r : g.rates)
      if (!(r >= 0.0 && r <= 1.0)) fail("run_experiment: rate outside [0, 1]");
  }
  if (cfg.runs < 1) fail("run_experiment: runs must be >= 1");
  if (train.dim != test.dim) fail("run_experiment: train/test dimension mismatch");
  cfg.kernel = resolve_kernel_config(cfg.kernel, train.dim);
  const std::size_t m_clusters =
      cfg.m_clusters ? cfg.m_clusters : 3 * std::size_t(train.num_classes);

  const bool any_asym = std::any_of(cfg.grids.begin(), cfg.grids.end(), [](const NoiseGrid& g) {
    return g.kind == NoiseKind::asymmetric;
  });
  if (any_asym && cfg.asym_mapping.empty()) {
    if (train.num_classes == 10) {
      cfg.asym_mapping = default_asymmetric_mapping_10class();
    } else {
      fail("run_experiment: asymmetric noise needs an explicit mapping for " +
           std::to_string(train.num_classes) + " classes");
    }
  }
  for (const auto& [src, dst] : cfg.asym_mapping) {
    if (src < 0 || src >= train.num_classes || dst < 0 || dst >= train.num_classes)
      fail("run_experiment: mapping class outside [0, C)");
    if (src == dst) fail("run_experiment: mapping has a fixed point");
  }

  const bool any_estimator = std::any_of(cfg.methods.begin(), cfg.methods.end(), is_estimator);
  const bool baseline = std::find(cfg.methods.begin(), cfg.methods.end(), "knn_baseline") !=
                        cfg.methods.end();
  const std::size_t k_rel = std::min(cfg.kernel.k_init, train.rows - 1);

  // Geometry depends only on features, so neighborhoods and candidate lists
  // are shared across every run and noise cell.
  std::vector<NnkNeighborhood> test_nb;
  std::vector<std::vector<std::size_t>> test_knn;
  if (any_estimator) {
    test_nb.resize(test.rows);
    parallel_for(test.rows, [&](std::size_t i) {
      test_nb[i] = build_neighborhood(train, test.row(i), cfg.kernel);
    });
  }
  if (baseline) {
    test_knn.resize(test.rows);
    parallel_for(test.rows, [&](std::size_t i) {
      test_knn[i] = knn_candidates(train, test.row(i), std::min(cfg.kernel.k_init, train.rows));
    });
  }
  std::vector<NnkNeighborhood> train_nb;
  std::vector<std::vector<std::size_t>> train_knn;
  if (cfg.train_accuracy) {
    if (any_estimator) {
      train_nb.resize(train.rows);
      parallel_for(train.rows, [&](std::size_t i) {
        train_nb[i] = build_neighborhood(train, train.row(i), cfg.kernel, nullptr, i);
      });
    }
    if (baseline) {
      train_knn.resize(train.rows);
      parallel_for(train.rows, [&](std::size_t i) {
        train_knn[i] = knn_candidates(train, train.row(i), k_rel, i);
      });
    }
  }

  ExperimentReport report;
  report.runs = cfg.runs;
  report.base_seed = cfg.base_seed;
  for (std::size_t r = 0; r < cfg.runs; ++r) report.run_seeds.push_back(cfg.base_seed + r);
  report.train_label_map = train.label_map;
  report.config_fingerprint = fnv1a64(canonical_config(cfg, train, test, m_clusters));

  std::vector<CellPlan> plan;
  for (const auto& token : cfg.methods) {
    if (!is_estimator(token)) {
      plan.push_back({token, "none", VoteMode::weighted});
      continue;
    }
    if (cfg.voting != VotingSelection::unweighted)
      plan.push_back({token, "weighted", VoteMode::weighted});
    if (cfg.voting != VotingSelection::weighted)
      plan.push_back({token, "unweighted", VoteMode::unweighted});
  }
  if (plan.empty()) fail("run_experiment: empty method plan");

  // voting cells per estimator, for attributing shared scoring time
  const double vote_cells = (cfg.voting == VotingSelection::both) ? 2.0 : 1.0;

  auto compute_scores = [&](const std::string& token, const EmbeddingDataset& noisy,
                            std::uint64_t seed) -> std::vector<double> {
    if (token == "knn") return knn_reliability(noisy, k_rel).scores;
    if (token == "nnk_weights") return nnk_weights_reliability(noisy, cfg.kernel).scores;
    if (token == "nnk_diam_ratio") return nnk_diameter_ratio_reliability(noisy, cfg.kernel).scores;
    if (token == "kmeans_sup") {
      const ClusterModel model = fit_supervised(noisy, cfg.k_per_class, seed, cfg.kmeans);
      return supervised_kmeans_reliability(noisy, model).scores;
    }
    const ClusterModel model = fit_unsupervised(noisy, m_clusters, seed, cfg.kmeans);
    return unsupervised_kmeans_reliability(noisy, model).scores;
  };

  for (const auto& grid : cfg.grids) {
    for (double rate : grid.rates) {
      struct Acc {
        std::vector<double> accs, train_accs;
        double secs = 0.0;
      };
      std::vector<Acc> acc(plan.size());

      for (std::size_t r = 0; r < cfg.runs; ++r) {
        const std::uint64_t seed = report.run_seeds[r];
        NoiseSpec spec{grid.kind, rate, cfg.asym_mapping, seed};
        const NoiseResult nr = apply_noise(train.labels, train.num_classes, spec);
        const EmbeddingDataset noisy = with_labels(train, nr.labels);

        std::map<std::string, std::vector<double>> scores;
        std::map<std::string, double> score_secs;
        for (const auto& token : cfg.methods) {
          if (!is_estimator(token) || scores.count(token)) continue;
          const double t0 = now_seconds();
          scores[token] = compute_scores(token, noisy, seed);
          score_secs[token] = now_seconds() - t0;
        }

        for (std::size_t p = 0; p < plan.size(); ++p) {
          const CellPlan& cell = plan[p];
          const double t0 = now_seconds();

          std::vector<int> preds(test.rows);
          if (cell.voting == "none") {
            parallel_for(test.rows, [&](std::size_t i) {
              preds[i] = majority_label(test_knn[i], noisy);
            });
          } else {
            const auto& sc = scores.at(cell.method);
            parallel_for(test.rows, [&](std::size_t i) {
              preds[i] = vote_neighborhood(test_nb[i], noisy, sc, cell.mode);
            });
          }
          std::size_t correct = 0;
          for (std::size_t i = 0; i < test.rows; ++i)
            correct += (train.label_map[preds[i]] == test.label_map[test.labels[i]]);
          acc[p].accs.push_back(double(correct) / double(test.rows));

          if (cfg.train_accuracy) {
            std::vector<int> tpred(train.rows);
            if (cell.voting == "none") {
              parallel_for(train.rows, [&](std::size_t i) {
                tpred[i] = majority_label(train_knn[i], noisy);
              });
            } else {
              const auto& sc = scores.at(cell.method);
              parallel_for(train.rows, [&](std::size_t i) {
                tpred[i] = vote_neighborhood(train_nb[i], noisy, sc, cell.mode);
              });
            }
            std::size_t tcorrect = 0;
            for (std::size_t i = 0; i < train.rows; ++i)
              tcorrect += (tpred[i] == train.labels[i]);  // clean labels
            acc[p].train_accs.push_back(double(tcorrect) / double(train.rows));
          }

          double dt = now_seconds() - t0;
          if (cell.voting != "none") dt += score_secs.at(cell.method) / vote_cells;
          acc[p].secs += dt;
        }
      }

      for (std::size_t p = 0; p < plan.size(); ++p) {
        CellResult cell;
        cell.method = plan[p].method;
        cell.voting = plan[p].voting;
        cell.noise_kind = kind_name(grid.kind);
        cell.rate = rate;
        cell.run_accuracies = acc[p].accs;
        std::tie(cell.acc_mean, cell.acc_std) = mean_std(acc[p].accs);
        if (cfg.train_accuracy) {
          cell.train_run_accuracies = acc[p].train_accs;
          std::tie(cell.train_acc_mean, cell.train_acc_std) = mean_std(acc[p].train_accs);
        }
        cell.seconds = acc[p].secs;
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

std::vector<std::string> emit_report(const ExperimentReport& report, const std::string& directory,
                                     const std::set<ReportFormat>& formats) {
  if (formats.empty()) throw std::invalid_argument("emit_report: empty format set");
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) fail("emit_report: cannot create directory '" + directory + "': " + ec.message());

  std::vector<std::string> files;

  if (formats.count(ReportFormat::csv)) {
    const std::string path = (fs::path(directory) / "report.csv").string();
    std::ofstream out(path);
    if (!out) fail("emit_report: cannot open '" + path + "'");
    out << "method,voting,noise_kind,rate,acc_mean,acc_std,seconds\n";
    for (const auto& c : report.cells)
      out << c.method << ',' << c.voting << ',' << c.noise_kind << ',' << fmt("%g", c.rate) << ','
          << fmt("%.6f", c.acc_mean) << ',' << fmt("%.6f", c.acc_std) << ','
          << fmt("%.3f", c.seconds) << "\n";
    if (!out.good()) fail("emit_report: write failed on '" + path + "'");
    files.push_back(path);

    const bool any_train =
        std::any_of(report.cells.begin(), report.cells.end(),
                    [](const CellResult& c) { return !c.train_run_accuracies.empty(); });
    if (any_train) {
      const std::string tpath = (fs::path(directory) / "report_train.csv").string();
      std::ofstream tout(tpath);
      if (!tout) fail("emit_report: cannot open '" + tpath + "'");
      tout << "method,voting,noise_kind,rate,acc_mean,acc_std,seconds\n";
      for (const auto& c : report.cells)
        tout << c.method << ',' << c.voting << ',' << c.noise_kind << ',' << fmt("%g", c.rate)
             << ',' << fmt("%.6f", c.train_acc_mean) << ',' << fmt("%.6f", c.train_acc_std) << ','
             << fmt("%.3f", c.seconds) << "\n";
      if (!tout.good()) fail("emit_report: write failed on '" + tpath + "'");
      files.push_back(tpath);
    }
  }

  if (formats.count(ReportFormat::json)) {
    json j;
    j["schema"] = "nnklab-report-v1";
    j["config_fingerprint"] = report.config_fingerprint;
    j["runs"] = report.runs;
    j["base_seed"] = report.base_seed;
    j["run_seeds"] = report.run_seeds;
    j["train_label_map"] = report.train_label_map;
    j["cells"] = json::array();
    for (const auto& c : report.cells) {
      json jc;
      jc["method"] = c.method;
      jc["voting"] = c.voting;
      jc["noise_kind"] = c.noise_kind;
      jc["rate"] = c.rate;
      jc["acc_mean"] = c.acc_mean;
      jc["acc_std"] = c.acc_std;
      jc["run_accuracies"] = c.run_accuracies;
      if (!c.train_run_accuracies.empty()) {
        jc["train_acc_mean"] = c.train_acc_mean;
        jc["train_acc_std"] = c.train_acc_std;
        jc["train_run_accuracies"] = c.train_run_accuracies;
      }
      jc["seconds"] = c.seconds;
      j["cells"].push_back(std::move(jc));
    }
    const std::string path = (fs::path(directory) / "report.json").string();
    std::ofstream out(path);
    if (!out) fail("emit_report: cannot open '" + path + "'");
    out << j.dump(2) << "\n";
    if (!out.good()) fail("emit_report: write failed on '" + path + "'");
    files.push_back(path);
  }

  if (formats.count(ReportFormat::svg)) {
    // one chart per noise kind: series keyed by (method, voting)
    std::vector<std::string> kinds;
    for (const auto& c : report.cells)
      if (std::find(kinds.begin(), kinds.end(), c.noise_kind) == kinds.end())
        kinds.push_back(c.noise_kind);
    for (const auto& kind : kinds) {
      std::vector<ChartSeries> series;
      std::vector<std::string> keys;
      for (const auto& c : report.cells) {
        if (c.noise_kind != kind) continue;
        const std::string key = c.method + "|" + c.voting;
        auto it = std::find(keys.begin(), keys.end(), key);
        std::size_t s;
        if (it == keys.end()) {
          keys.push_back(key);
          ChartSeries cs;
          cs.label = c.voting == "none" ? c.method
                                        : c.method + (c.voting == "weighted" ? " (W)" : " (UW)");
          cs.dashed = (c.voting == "unweighted");
          series.push_back(std::move(cs));
          s = series.size() - 1;
        } else {
          s = std::size_t(it - keys.begin());
        }
        series[s].x.push_back(c.rate);
        series[s].y.push_back(c.acc_mean);
        series[s].band.push_back(c.acc_std);
      }
      const std::string path = (fs::path(directory) / ("accuracy_" + kind + ".svg")).string();
      write_line_chart_svg(path, "accuracy vs " + kind + " label noise", "noise rate", "accuracy",
                           series);
      files.push_back(path);
    }
  }
  return files;
}

ExperimentReport load_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("load_report_json: cannot open '" + path + "'");
  json j = json::parse(in);
  ExperimentReport report;
  report.config_fingerprint = j.at("config_fingerprint").get<std::uint64_t>();
  report.runs = j.at("runs").get<std::size_t>();
  report.base_seed = j.at("base_seed").get<std::uint64_t>();
  report.run_seeds = j.at("run_seeds").get<std::vector<std::uint64_t>>();
  report.train_label_map = j.at("train_label_map").get<std::vector<std::int64_t>>();
  for (const auto& jc : j.at("cells")) {
    CellResult c;
    c.method = jc.at("method").get<std::string>();
    c.voting = jc.at("voting").get<std::string>();
    c.noise_kind = jc.at("noise_kind").get<std::string>();
    c.rate = jc.at("rate").get<double>();
    c.acc_mean = jc.at("acc_mean").get<double>();
    c.acc_std = jc.at("acc_std").get<double>();
    c.run_accuracies = jc.at("run_accuracies").get<std::vector<double>>();
    if (jc.contains("train_run_accuracies")) {
      c.train_acc_mean = jc.at("train_acc_mean").get<double>();
      c.train_acc_std = jc.at("train_acc_std").get<double>();
      c.train_run_accuracies = jc.at("train_run_accuracies").get<std::vector<double>>();
    }
    c.seconds = jc.at("seconds").get<double>();
    report.cells.push_back(std::move(c));
  }
  return report;
}

std::pair<EmbeddingDataset, EmbeddingDataset> generate_synthetic(int num_classes,
                                                                 std::size_t per_class,
                                                                 std::size_t dim,
                                                                 double separation,
                                                                 std::uint64_t seed) {
  if (num_classes < 2) fail("generate_synthetic: need at least 2 classes");
  if (per_class < 2) fail("generate_synthetic: need at least 2 samples per class");
  if (dim < 2) fail("generate_synthetic: need dim >= 2");
  if (!(separation > 0.0)) fail("generate_synthetic: separation must be positive");

  rng::Engine g(seed);
  const std::size_t c_count = std::size_t(num_classes);

  // unit class directions, rescaled so the closest pair of means sits exactly
  // `separation` apart
  std::vector<double> dirs(c_count * dim);
  double min_pair = 0.0;
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (std::size_t c = 0; c < c_count; ++c) {
      double norm2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        dirs[c * dim + d] = rng::normal(g);
        norm2 += dirs[c * dim + d] * dirs[c * dim + d];
      }
      const double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t d = 0; d < dim; ++d) dirs[c * dim + d] *= inv;
    }
    min_pair = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < c_count; ++a)
      for (std::size_t b = a + 1; b < c_count; ++b) {
        double d2 = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = dirs[a * dim + d] - dirs[b * dim + d];
          d2 += diff * diff;
        }
        min_pair = std::min(min_pair, std::sqrt(d2));
      }
    if (min_pair > 1e-3) break;
  }
  if (!(min_pair > 0.0)) fail("generate_synthetic: degenerate class directions");
  const double scale = separation / min_pair;

  std::vector<float> train_vals, test_vals;
  std::vector<std::int64_t> train_labels, test_labels;
  for (std::size_t c = 0; c < c_count; ++c) {
    for (std::size_t s = 0; s < per_class; ++s) {
      const bool to_train = (s % 2 == 0);
      auto& vals = to_train ? train_vals : test_vals;
      auto& labs = to_train ? train_labels : test_labels;
      for (std::size_t d = 0; d < dim; ++d)
        vals.push_back(float(scale * dirs[c * dim + d] + rng::normal(g)));
      labs.push_back(std::int64_t(c));
    }
  }
  EmbeddingDataset train = l2_normalize(make_dataset(std::move(train_vals), dim, train_labels));
  EmbeddingDataset test = l2_normalize(make_dataset(std::move(test_vals), dim, test_labels));
  return {std::move(train), std::move(test)};
}

}  // namespace nnklab
