// nnklab command line: synthetic data generation, label-noise injection,
// reliability scoring, classification, and the full benchmark sweep.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "nnklab/bench.hpp"
#include "nnklab/dataset.hpp"
#include "nnklab/inference.hpp"
#include "nnklab/noise.hpp"
#include "nnklab/parallel.hpp"
#include "nnklab/reliability.hpp"

namespace fs = std::filesystem;
using namespace nnklab;

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Flat key=value config support. CLI11 2.x does not feed a config file to a
// subcommand invoked as `prog sub --config file`, so the file is expanded into
// --key=value tokens placed ahead of the explicit flags; with TakeLast options
// the command line then overrides the file.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() < 2) return args;
  std::string cfg_path;
  std::vector<std::string> tail;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::runtime_error("--config needs a file path");
      cfg_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      cfg_path = args[i].substr(9);
    } else {
      tail.push_back(args[i]);
    }
  }
  if (cfg_path.empty()) return args;
  std::ifstream in(cfg_path);
  if (!in) throw std::runtime_error("cannot open config file '" + cfg_path + "'");
  std::vector<std::string> out = {args[0], args[1]};
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line is not key=value: '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config line has an empty key: '" + t + "'");
    out.push_back("--" + key + "=" + value);
  }
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

DataFormat parse_data_format(const std::string& s) {
  if (s == "binary") return DataFormat::binary;
  if (s == "csv") return DataFormat::csv;
  throw CLI::ValidationError("--format", "expected 'binary' or 'csv'");
}

std::vector<double> parse_rates(const std::string& s) {
  std::vector<double> rates;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string::npos) end = s.size();
    const std::string tok = s.substr(pos, end - pos);
    if (!tok.empty()) rates.push_back(std::stod(tok));
    pos = end + 1;
  }
  if (rates.empty()) throw CLI::ValidationError("--rates", "no rates given");
  return rates;
}

std::vector<std::string> parse_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string::npos) end = s.size();
    if (end > pos) out.push_back(s.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

std::set<ReportFormat> parse_formats(const std::string& s) {
  std::set<ReportFormat> out;
  for (const auto& tok : parse_list(s)) {
    if (tok == "csv")
      out.insert(ReportFormat::csv);
    else if (tok == "json")
      out.insert(ReportFormat::json);
    else if (tok == "svg")
      out.insert(ReportFormat::svg);
    else
      throw CLI::ValidationError("--formats", "unknown format '" + tok + "'");
  }
  return out;
}

EmbeddingDataset load_normalized(const std::string& emb, const std::string& lbl,
                                 const std::string& format) {
  return l2_normalize(load_dataset(emb, lbl, parse_data_format(format)));
}

struct ScoringParams {
  std::size_t k_init = 50;
  double sigma = 0.0;  // 0 -> 100*sqrt(d)
  std::size_t kc = 1;
  std::size_t m_clusters = 0;  // 0 -> 3*C
  std::uint64_t seed = 0;
};

void add_scoring_options(CLI::App* cmd, ScoringParams& p) {
  cmd->add_option("--k-init", p.k_init, "initial neighbor candidate count")->capture_default_str();
  cmd->add_option("--sigma", p.sigma, "Gaussian kernel bandwidth (0 = 100*sqrt(dim))")
      ->capture_default_str();
  cmd->add_option("--kc", p.kc, "supervised centroids per class")->capture_default_str();
  cmd->add_option("--m-clusters", p.m_clusters, "unsupervised centroid count (0 = 3*C)")
      ->capture_default_str();
  cmd->add_option("--seed", p.seed, "random seed")->capture_default_str();
}

ReliabilityVector score_with(const std::string& method, const EmbeddingDataset& train,
                             const ScoringParams& p) {
  const KernelConfig kernel{p.sigma, p.k_init};
  if (method == "knn") return knn_reliability(train, std::min(p.k_init, train.rows - 1));
  if (method == "nnk_weights") return nnk_weights_reliability(train, kernel);
  if (method == "nnk_diam_ratio") return nnk_diameter_ratio_reliability(train, kernel);
  if (method == "kmeans_sup")
    return supervised_kmeans_reliability(train, fit_supervised(train, p.kc, p.seed));
  if (method == "kmeans_unsup") {
    const std::size_t m = p.m_clusters ? p.m_clusters : 3 * std::size_t(train.num_classes);
    return unsupervised_kmeans_reliability(train, fit_unsupervised(train, m, p.seed));
  }
  throw CLI::ValidationError("--method", "unknown reliability method '" + method + "'");
}

int cmd_gen_synthetic(int classes, std::size_t per_class, std::size_t dim, double separation,
                      std::uint64_t seed, const std::string& out, const std::string& format) {
  const auto [train, test] = generate_synthetic(classes, per_class, dim, separation, seed);
  fs::create_directories(out);
  if (parse_data_format(format) == DataFormat::binary) {
    save_dataset_binary(train, (fs::path(out) / "train.emb").string(),
                        (fs::path(out) / "train.lbl").string());
    save_dataset_binary(test, (fs::path(out) / "test.emb").string(),
                        (fs::path(out) / "test.lbl").string());
  } else {
    save_dataset_csv(train, (fs::path(out) / "train.csv").string());
    save_dataset_csv(test, (fs::path(out) / "test.csv").string());
  }
  std::printf("wrote %zu train and %zu test samples (%d classes, dim %zu) to %s\n", train.rows,
              test.rows, classes, dim, out.c_str());
  return 0;
}

int cmd_inject_noise(const std::string& labels_path, const std::string& kind, double rate,
                     const std::string& mapping_text, std::uint64_t seed, const std::string& out) {
  const auto raw = read_label_file(labels_path);
  // densify for the injection, then map back to the original label values
  std::vector<std::int64_t> uniq;
  std::vector<int> dense(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto it = std::find(uniq.begin(), uniq.end(), raw[i]);
    if (it == uniq.end()) {
      uniq.push_back(raw[i]);
      dense[i] = int(uniq.size() - 1);
    } else {
      dense[i] = int(it - uniq.begin());
    }
  }
  NoiseSpec spec;
  spec.rate = rate;
  spec.seed = seed;
  if (kind == "sym") {
    spec.kind = NoiseKind::symmetric;
  } else if (kind == "asym") {
    spec.kind = NoiseKind::asymmetric;
    spec.mapping = mapping_text.empty() && uniq.size() == 10
                       ? default_asymmetric_mapping_10class()
                       : parse_mapping(mapping_text);
  } else {
    throw CLI::ValidationError("--noise", "expected 'sym' or 'asym'");
  }
  const auto res = apply_noise(dense, int(uniq.size()), spec);

  fs::create_directories(out);
  std::vector<std::int64_t> noisy(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) noisy[i] = uniq[std::size_t(res.labels[i])];
  std::ifstream probe(labels_path, std::ios::binary);
  char magic[4] = {};
  probe.read(magic, 4);
  const bool binary = std::string(magic, 4) == "LBL1";
  const std::string noisy_path =
      (fs::path(out) / (binary ? "noisy_labels.lbl" : "noisy_labels.txt")).string();
  write_label_file(noisy_path, noisy, binary);
  write_flip_mask_csv((fs::path(out) / "flip_mask.csv").string(), dense, res);
  std::printf("flipped %zu of %zu labels -> %s\n", res.flip_count, raw.size(),
              noisy_path.c_str());
  return 0;
}

int cmd_bench(CLI::App* cmd, const std::string& emb, const std::string& lbl,
              const std::string& test_emb, const std::string& test_lbl,
              const std::string& format, bool synthetic, int classes, std::size_t per_class,
              std::size_t dim, double separation, const std::string& noise,
              const std::string& rates_text, const std::string& mapping_text, std::size_t runs,
              const ScoringParams& params, const std::string& methods_text,
              const std::string& voting, bool train_acc, const std::string& out,
              const std::string& formats_text) {
  EmbeddingDataset train, test;
  if (synthetic) {
    std::tie(train, test) = generate_synthetic(classes, per_class, dim, separation, params.seed);
  } else {
    if (emb.empty() || test_emb.empty())
      throw CLI::ValidationError("--embeddings",
                                 "need --embeddings/--test-embeddings or --synthetic");
    train = load_normalized(emb, lbl, format);
    test = load_normalized(test_emb, test_lbl, format);
  }

  ExperimentConfig cfg;
  cfg.runs = runs;
  cfg.base_seed = params.seed;
  cfg.kernel = {params.sigma, params.k_init};
  cfg.k_per_class = params.kc;
  cfg.m_clusters = params.m_clusters;
  cfg.train_accuracy = train_acc;
  if (!methods_text.empty()) cfg.methods = parse_list(methods_text);
  if (voting == "w")
    cfg.voting = VotingSelection::weighted;
  else if (voting == "uw")
    cfg.voting = VotingSelection::unweighted;
  else if (voting == "both")
    cfg.voting = VotingSelection::both;
  else
    throw CLI::ValidationError("--voting", "expected w, uw or both");
  if (!mapping_text.empty()) cfg.asym_mapping = parse_mapping(mapping_text);

  const bool rates_given = cmd->count("--rates") > 0;
  const std::vector<double> sym_rates =
      rates_given ? parse_rates(rates_text) : std::vector<double>{0.0, 0.2, 0.4, 0.6};
  const std::vector<double> asym_rates =
      rates_given ? parse_rates(rates_text) : std::vector<double>{0.0, 0.2, 0.3, 0.4};
  if (noise == "sym") {
    cfg.grids = {{NoiseKind::symmetric, sym_rates}};
  } else if (noise == "asym") {
    cfg.grids = {{NoiseKind::asymmetric, asym_rates}};
  } else if (noise == "both") {
    cfg.grids = {{NoiseKind::symmetric, sym_rates}, {NoiseKind::asymmetric, asym_rates}};
  } else {
    throw CLI::ValidationError("--noise", "expected sym, asym or both");
  }

  const auto report = run_experiment(train, test, cfg);
  const auto files =
      emit_report(report, out, formats_text.empty() ? std::set<ReportFormat>{ReportFormat::csv,
                                                                             ReportFormat::json,
                                                                             ReportFormat::svg}
                                                    : parse_formats(formats_text));
  for (const auto& c : report.cells)
    std::printf("%-16s %-10s %-10s rate %.2f  acc %.4f +/- %.4f  (%.2fs)\n", c.method.c_str(),
                c.voting.c_str(), c.noise_kind.c_str(), c.rate, c.acc_mean, c.acc_std, c.seconds);
  for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "geometry-aware reliability estimation and reliability-weighted "
      "nearest-neighbor classification over embedding files"};
  app.require_subcommand(1);

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "generate a separable Gaussian-blob fixture");
  int g_classes = 10;
  std::size_t g_per_class = 100, g_dim = 32;
  double g_sep = 20.0;
  std::uint64_t g_seed = 0;
  std::string g_out = "synthetic", g_format = "binary";
  gen->add_option("--classes", g_classes)->capture_default_str();
  gen->add_option("--per-class", g_per_class, "samples per class before the train/test split")
      ->capture_default_str();
  gen->add_option("--dim", g_dim)->capture_default_str();
  gen->add_option("--separation", g_sep, "minimum distance between class means")
      ->capture_default_str();
  gen->add_option("--seed", g_seed)->capture_default_str();
  gen->add_option("--out", g_out, "output directory")->capture_default_str();
  gen->add_option("--format", g_format, "binary or csv")->capture_default_str();


  // inject-noise
  auto* noise = app.add_subcommand("inject-noise", "corrupt a label file with seeded noise");
  std::string n_labels, n_kind = "sym", n_mapping, n_out = "noisy";
  double n_rate = 0.2;
  std::uint64_t n_seed = 0;
  noise->add_option("--labels", n_labels, "label file (LBL1 or text)")->required();
  noise->add_option("--noise", n_kind, "sym or asym")->capture_default_str();
  noise->add_option("--rate", n_rate)->capture_default_str();
  noise->add_option("--mapping", n_mapping, "asymmetric pairs, e.g. 2:0,9:1");
  noise->add_option("--seed", n_seed)->capture_default_str();
  noise->add_option("--out", n_out, "output directory")->capture_default_str();


  // score
  auto* score = app.add_subcommand("score", "per-sample reliability scores for a train set");
  std::string s_emb, s_lbl, s_format = "binary", s_method = "nnk_weights", s_out = "scores.csv";
  ScoringParams s_params;
  score->add_option("--embeddings", s_emb)->required();
  score->add_option("--labels", s_lbl, "labels file (may be empty for combined csv)");
  score->add_option("--format", s_format, "binary or csv")->capture_default_str();
  score->add_option("--method", s_method,
                    "knn | nnk_weights | nnk_diam_ratio | kmeans_sup | kmeans_unsup")
      ->capture_default_str();
  add_scoring_options(score, s_params);
  score->add_option("--out", s_out, "output csv")->capture_default_str();


  // classify
  auto* cls = app.add_subcommand("classify", "classify a test set with one method");
  std::string c_emb, c_lbl, c_temb, c_tlbl, c_format = "binary", c_method = "nnk_weights",
              c_voting = "w", c_out = "predictions.csv";
  ScoringParams c_params;
  cls->add_option("--embeddings", c_emb)->required();
  cls->add_option("--labels", c_lbl);
  cls->add_option("--test-embeddings", c_temb)->required();
  cls->add_option("--test-labels", c_tlbl);
  cls->add_option("--format", c_format, "binary or csv")->capture_default_str();
  cls->add_option("--method", c_method, "reliability method or knn_baseline")
      ->capture_default_str();
  cls->add_option("--voting", c_voting, "w or uw")->capture_default_str();
  add_scoring_options(cls, c_params);
  cls->add_option("--out", c_out, "predictions csv")->capture_default_str();


  // bench
  auto* bench = app.add_subcommand("bench", "full noise x method x voting sweep");
  std::string b_emb, b_lbl, b_temb, b_tlbl, b_format = "binary";
  bool b_synth = false;
  int b_classes = 10;
  std::size_t b_per_class = 100, b_dim = 32;
  double b_sep = 20.0;
  std::string b_noise = "sym", b_rates, b_mapping, b_methods, b_voting = "both";
  std::size_t b_runs = 5;
  bool b_train_acc = false;
  std::string b_out = "bench_out", b_formats;
  ScoringParams b_params;
  bench->add_option("--embeddings", b_emb);
  bench->add_option("--labels", b_lbl);
  bench->add_option("--test-embeddings", b_temb);
  bench->add_option("--test-labels", b_tlbl);
  bench->add_option("--format", b_format, "binary or csv")->capture_default_str();
  bench->add_flag("--synthetic", b_synth, "run on a generated fixture instead of files");
  bench->add_option("--classes", b_classes)->capture_default_str();
  bench->add_option("--per-class", b_per_class)->capture_default_str();
  bench->add_option("--dim", b_dim)->capture_default_str();
  bench->add_option("--separation", b_sep)->capture_default_str();
  bench->add_option("--noise", b_noise, "sym, asym or both")->capture_default_str();
  bench->add_option("--rates", b_rates, "comma list; default per-kind protocol rates");
  bench->add_option("--mapping", b_mapping, "asymmetric pairs, e.g. 2:0,9:1");
  bench->add_option("--runs", b_runs)->capture_default_str();
  add_scoring_options(bench, b_params);
  bench->add_option("--methods", b_methods, "comma list; default all methods");
  bench->add_option("--voting", b_voting, "w, uw or both")->capture_default_str();
  bench->add_flag("--train-acc", b_train_acc,
                  "also score the noisy-trained methods on the clean train labels");
  bench->add_option("--out", b_out, "report directory")->capture_default_str();
  bench->add_option("--formats", b_formats, "csv,json,svg subset; default all");


  // report
  auto* rep = app.add_subcommand("report", "re-render report files from a report.json");
  std::string r_in, r_out = "report_out", r_formats = "csv,svg";
  rep->add_option("--in", r_in, "report.json produced by bench")->required();
  rep->add_option("--out", r_out)->capture_default_str();
  rep->add_option("--formats", r_formats)->capture_default_str();


  std::string config_doc;
  for (auto* sub : app.get_subcommands({})) {
    sub->add_option("--config", config_doc,
                    "flat key=value config file; command-line flags override");
    for (auto* opt : sub->get_options())
      opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }

  std::vector<std::string> args;
  try {
    args = expand_config_args(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::vector<const char*> cargv;
  cargv.reserve(args.size());
  for (const auto& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(int(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed())
      return cmd_gen_synthetic(g_classes, g_per_class, g_dim, g_sep, g_seed, g_out, g_format);
    if (noise->parsed())
      return cmd_inject_noise(n_labels, n_kind, n_rate, n_mapping, n_seed, n_out);
    if (score->parsed()) {
      const auto train = load_normalized(s_emb, s_lbl, s_format);
      const auto rv = score_with(s_method, train, s_params);
      write_reliability_csv(s_out, train, rv);
      std::printf("wrote %zu scores to %s\n", rv.scores.size(), s_out.c_str());
      return 0;
    }
    if (cls->parsed()) {
      const auto train = load_normalized(c_emb, c_lbl, c_format);
      const auto test = load_normalized(c_temb, c_tlbl, c_format);
      const KernelConfig kernel{c_params.sigma, c_params.k_init};
      std::vector<int> preds(test.rows);
      if (c_method == "knn_baseline") {
        const std::size_t k = std::min(c_params.k_init, train.rows);
        parallel_for(test.rows,
                     [&](std::size_t i) { preds[i] = knn_baseline(test.row(i), train, k); });
      } else {
        const auto rv = score_with(c_method, train, c_params);
        const VoteConfig vcfg{c_voting == "uw" ? VoteMode::unweighted : VoteMode::weighted,
                              kernel};
        parallel_for(test.rows, [&](std::size_t i) {
          preds[i] = vcfg.mode == VoteMode::weighted
                         ? classify_weighted(test.row(i), train, rv, vcfg)
                         : classify_unweighted(test.row(i), train, rv, vcfg);
        });
      }
      std::ofstream out(c_out);
      if (!out) throw std::runtime_error("cannot open '" + c_out + "'");
      out << "id,predicted\n";
      for (std::size_t i = 0; i < test.rows; ++i)
        out << test.ids[i] << ',' << train.label_map[preds[i]] << "\n";
      std::size_t correct = 0;
      for (std::size_t i = 0; i < test.rows; ++i)
        correct += (train.label_map[preds[i]] == test.label_map[test.labels[i]]);
      std::printf("accuracy %.4f over %zu test samples; wrote %s\n",
                  double(correct) / double(test.rows), test.rows, c_out.c_str());
      return 0;
    }
    if (bench->parsed())
      return cmd_bench(bench, b_emb, b_lbl, b_temb, b_tlbl, b_format, b_synth, b_classes,
                       b_per_class, b_dim, b_sep, b_noise, b_rates, b_mapping, b_runs, b_params,
                       b_methods, b_voting, b_train_acc, b_out, b_formats);
    if (rep->parsed()) {
      const auto report = load_report_json(r_in);
      const auto files = emit_report(report, r_out, parse_formats(r_formats));
      for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
