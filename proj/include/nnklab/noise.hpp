#pragma once
// Seeded label corruption with exact flip counts. Symmetric noise redraws a
// uniform fraction of labels among the other classes; asymmetric noise sends
// a fixed fraction of each mapped source class to its target class.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace nnklab {

enum class NoiseKind { symmetric, asymmetric };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::symmetric;
  double rate = 0.0;
  std::map<int, int> mapping;  // asymmetric only; no fixed points allowed
  std::uint64_t seed = 0;
};

struct NoiseResult {
  std::vector<int> labels;
  std::vector<std::uint8_t> flipped;  // ground-truth flip mask
  std::size_t flip_count = 0;
};

// Exactly floor(rate*N) samples, uniform without replacement, each relabeled
// uniformly among the other C-1 classes.
NoiseResult inject_symmetric(std::span<const int> labels, double rate, int num_classes,
                             std::uint64_t seed);

// Exactly floor(rate*n_c) members of every mapped source class c relabeled to
// mapping[c]; unmapped classes untouched.
NoiseResult inject_asymmetric(std::span<const int> labels, double rate,
                              const std::map<int, int>& mapping, std::uint64_t seed);

NoiseResult apply_noise(std::span<const int> labels, int num_classes, const NoiseSpec& spec);

// Conventional 10-class image mapping: truck->automobile, bird->airplane,
// deer->horse, cat<->dog.
std::map<int, int> default_asymmetric_mapping_10class();

// "src:dst,src:dst" pairs
std::map<int, int> parse_mapping(const std::string& text);

// CSV export: id,original,noisy,flipped
void write_flip_mask_csv(const std::string& path, std::span<const int> original,
                         const NoiseResult& result);

}  // namespace nnklab
