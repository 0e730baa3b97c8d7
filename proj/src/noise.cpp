#include "nnklab/noise.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "nnklab/rng.hpp"

namespace nnklab {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

// floor(rate*n) with a tiny absorber so decimal rates like 0.3 * 10 do not
// land one below the intended count.
std::size_t exact_count(double rate, std::size_t n) {
  return std::size_t(std::floor(rate * double(n) + 1e-9));
}

void check_rate(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) fail("noise: rate must be in [0, 1]");
}

}  // namespace

NoiseResult inject_symmetric(std::span<const int> labels, double rate, int num_classes,
                             std::uint64_t seed) {
  check_rate(rate);
  NoiseResult res;
  res.labels.assign(labels.begin(), labels.end());
  res.flipped.assign(labels.size(), 0);

  const std::size_t flips = exact_count(rate, labels.size());
  if (flips == 0) return res;
  if (num_classes < 2) fail("inject_symmetric: need at least 2 classes to flip labels");

  rng::Engine g(seed);
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  rng::partial_shuffle(order, flips, g);

  for (std::size_t t = 0; t < flips; ++t) {
    const std::size_t i = order[t];
    const int old = res.labels[i];
    // uniform over the other C-1 classes
    const int draw = int(rng::uniform_index(g, std::size_t(num_classes - 1)));
    res.labels[i] = draw >= old ? draw + 1 : draw;
    res.flipped[i] = 1;
  }
  res.flip_count = flips;
  return res;
}

NoiseResult inject_asymmetric(std::span<const int> labels, double rate,
                              const std::map<int, int>& mapping, std::uint64_t seed) {
  check_rate(rate);
  for (const auto& [src, dst] : mapping)
    if (src == dst)
      fail("inject_asymmetric: mapping has fixed point " + std::to_string(src) + "->" +
           std::to_string(dst));

  NoiseResult res;
  res.labels.assign(labels.begin(), labels.end());
  res.flipped.assign(labels.size(), 0);
  if (rate == 0.0 || mapping.empty()) return res;

  rng::Engine g(seed);
  // std::map iterates sources in ascending order: deterministic draw order
  for (const auto& [src, dst] : mapping) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == src) members.push_back(i);
    const std::size_t flips = exact_count(rate, members.size());
    if (flips == 0) continue;
    rng::partial_shuffle(members, flips, g);
    for (std::size_t t = 0; t < flips; ++t) {
      res.labels[members[t]] = dst;
      res.flipped[members[t]] = 1;
    }
    res.flip_count += flips;
  }
  return res;
}

NoiseResult apply_noise(std::span<const int> labels, int num_classes, const NoiseSpec& spec) {
  if (spec.kind == NoiseKind::symmetric)
    return inject_symmetric(labels, spec.rate, num_classes, spec.seed);
  return inject_asymmetric(labels, spec.rate, spec.mapping, spec.seed);
}

std::map<int, int> default_asymmetric_mapping_10class() {
  return {{9, 1}, {2, 0}, {4, 7}, {3, 5}, {5, 3}};
}

std::map<int, int> parse_mapping(const std::string& text) {
  std::map<int, int> mapping;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    const std::string pair = text.substr(pos, end - pos);
    const std::size_t colon = pair.find(':');
    if (colon == std::string::npos)
      fail("parse_mapping: expected src:dst in '" + pair + "'");
    try {
      const int src = std::stoi(pair.substr(0, colon));
      const int dst = std::stoi(pair.substr(colon + 1));
      mapping[src] = dst;
    } catch (const std::exception&) {
      fail("parse_mapping: bad pair '" + pair + "'");
    }
    pos = end + 1;
  }
  return mapping;
}

void write_flip_mask_csv(const std::string& path, std::span<const int> original,
                         const NoiseResult& result) {
  if (original.size() != result.labels.size())
    fail("write_flip_mask_csv: size mismatch");
  std::ofstream out(path);
  if (!out) fail("write_flip_mask_csv: cannot open '" + path + "'");
  out << "id,original,noisy,flipped\n";
  for (std::size_t i = 0; i < original.size(); ++i)
    out << i << ',' << original[i] << ',' << result.labels[i] << ',' << int(result.flipped[i])
        << "\n";
  if (!out.good()) fail("write_flip_mask_csv: write failed on '" + path + "'");
}

}  // namespace nnklab
