#pragma once
// Embedding ingestion: file loading, validation, label remapping and row
// normalization. Datasets are immutable after construction and safe to share
// across threads.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nnklab {

struct EmbeddingDataset {
  std::size_t rows = 0;
  std::size_t dim = 0;
  int num_classes = 0;
  std::vector<float> values;            // rows x dim, row-major
  std::vector<int> labels;              // dense class ids in [0, num_classes)
  std::vector<std::int64_t> ids;        // stable per-sample ids (input row order)
  std::vector<std::int64_t> label_map;  // dense id -> original label value

  const float* row_ptr(std::size_t i) const { return values.data() + i * dim; }
  std::span<const float> row(std::size_t i) const { return {row_ptr(i), dim}; }
};

enum class DataFormat { binary, csv };

// Validates dimensions/finiteness and remaps labels to a dense [0, C) range in
// first-appearance order. Does NOT normalize rows; see l2_normalize.
//
// binary: embeddings_path is an EMB1 file, labels_path an LBL1 file.
// csv:    with an empty labels_path, embeddings_path is a combined file whose
//         first column is the integer label; otherwise embeddings_path holds
//         features only and labels_path one integer label per row.
EmbeddingDataset load_dataset(const std::string& embeddings_path,
                              const std::string& labels_path, DataFormat format);

// Builds a dataset from in-memory rows, applying the same validation and
// label remapping as load_dataset.
EmbeddingDataset make_dataset(std::vector<float> values, std::size_t dim,
                              const std::vector<std::int64_t>& raw_labels);

// Returns a copy whose rows all have unit Euclidean norm. Rows already within
// 1e-6 of unit norm are passed through unchanged, which makes the operation
// idempotent. A zero-norm row is an error.
EmbeddingDataset l2_normalize(const EmbeddingDataset& in);

// Copy with replaced (already dense) labels; class count is preserved.
EmbeddingDataset with_labels(const EmbeddingDataset& in, std::vector<int> labels);

// EMB1: "EMB1" magic, u32 row count, u32 dim count, row-major f32, all
// little-endian. LBL1: "LBL1" magic, u32 count, i32 original label values.
void save_dataset_binary(const EmbeddingDataset& ds, const std::string& embeddings_path,
                         const std::string& labels_path);
// Combined CSV, one row per sample: label,f1,...,fd with a header line.
void save_dataset_csv(const EmbeddingDataset& ds, const std::string& path);

// Label files on their own: LBL1 when the magic matches, otherwise one
// integer per line (optional header).
std::vector<std::int64_t> read_label_file(const std::string& path);
void write_label_file(const std::string& path, std::span<const std::int64_t> labels, bool binary);

}  // namespace nnklab
