#include "nnklab/dataset.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "nnklab/simd.hpp"

namespace nnklab {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

// Explicit little-endian packing so the binary formats are bit-exact on any
// host.
void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff), char((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
float get_f32(std::istream& in) { return std::bit_cast<float>(get_u32(in)); }

void put_i32(std::ostream& out, std::int32_t v) { put_u32(out, std::uint32_t(v)); }
std::int32_t get_i32(std::istream& in) { return std::int32_t(get_u32(in)); }

bool read_magic(std::istream& in, const char* want) {
  char m[4];
  in.read(m, 4);
  return in.good() && std::memcmp(m, want, 4) == 0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& field, double& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_i64(const std::string& field, std::int64_t& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

struct EmbFile {
  std::size_t rows = 0, dim = 0;
  std::vector<float> values;
};

EmbFile read_emb1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("load_dataset: cannot open '" + path + "'");
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0);
  if (size == 0) fail("load_dataset: '" + path + "' is empty");
  if (!read_magic(in, "EMB1")) fail("load_dataset: '" + path + "' is not an EMB1 file (unknown format)");
  EmbFile f;
  f.rows = get_u32(in);
  f.dim = get_u32(in);
  if (!in.good()) fail("load_dataset: truncated header in '" + path + "'");
  if (f.rows == 0 || f.dim == 0) fail("load_dataset: '" + path + "' declares an empty matrix");
  const std::size_t expect = std::size_t(size) - 12;
  if (expect != f.rows * f.dim * 4)
    fail("load_dataset: '" + path + "' payload size does not match rows*dims (dimension mismatch)");
  f.values.resize(f.rows * f.dim);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = get_f32(in);
  if (!in.good()) fail("load_dataset: truncated payload in '" + path + "'");
  return f;
}

std::vector<std::int64_t> read_lbl1(std::ifstream& in, const std::string& path) {
  const std::uint32_t n = get_u32(in);
  if (!in.good()) fail("read_label_file: truncated header in '" + path + "'");
  std::vector<std::int64_t> labels(n);
  for (std::uint32_t i = 0; i < n; ++i) labels[i] = get_i32(in);
  if (!in.good()) fail("read_label_file: truncated payload in '" + path + "'");
  return labels;
}

std::vector<std::int64_t> read_text_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("read_label_file: cannot open '" + path + "'");
  std::vector<std::int64_t> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    std::int64_t v;
    if (!parse_i64(t, v)) {
      if (lineno == 1) continue;  // header
      fail("read_label_file: '" + path + "' row " + std::to_string(lineno) +
           ": not an integer label");
    }
    labels.push_back(v);
  }
  if (labels.empty()) fail("read_label_file: '" + path + "' is empty");
  return labels;
}

void check_finite(const std::vector<float>& values, std::size_t dim, const std::string& origin) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      fail(origin + ": non-finite feature value at row " + std::to_string(i / dim) + ", column " +
           std::to_string(i % dim));
  }
}

}  // namespace

EmbeddingDataset make_dataset(std::vector<float> values, std::size_t dim,
                              const std::vector<std::int64_t>& raw_labels) {
  if (dim == 0) fail("make_dataset: dimension must be >= 1");
  if (values.size() % dim != 0) fail("make_dataset: value count is not a multiple of dim");
  const std::size_t rows = values.size() / dim;
  if (rows == 0) fail("make_dataset: no rows");
  if (raw_labels.size() != rows)
    fail("make_dataset: dimension mismatch: " + std::to_string(rows) + " embedding rows vs " +
         std::to_string(raw_labels.size()) + " labels");
  check_finite(values, dim, "make_dataset");

  EmbeddingDataset ds;
  ds.rows = rows;
  ds.dim = dim;
  ds.values = std::move(values);
  ds.labels.resize(rows);
  ds.ids.resize(rows);

  // Remap raw label values to [0, C) in first-appearance order.
  std::unordered_map<std::int64_t, int> dense;
  for (std::size_t i = 0; i < rows; ++i) {
    ds.ids[i] = std::int64_t(i);
    auto [it, inserted] = dense.try_emplace(raw_labels[i], int(ds.label_map.size()));
    if (inserted) ds.label_map.push_back(raw_labels[i]);
    ds.labels[i] = it->second;
  }
  ds.num_classes = int(ds.label_map.size());
  if (ds.num_classes < 2) fail("make_dataset: need at least 2 classes, got " +
                               std::to_string(ds.num_classes));
  return ds;
}

EmbeddingDataset load_dataset(const std::string& embeddings_path, const std::string& labels_path,
                              DataFormat format) {
  if (format == DataFormat::binary) {
    if (labels_path.empty()) fail("load_dataset: binary format needs a labels file");
    EmbFile f = read_emb1(embeddings_path);
    std::vector<std::int64_t> labels = read_label_file(labels_path);
    if (labels.size() != f.rows)
      fail("load_dataset: dimension mismatch: " + std::to_string(f.rows) + " embedding rows vs " +
           std::to_string(labels.size()) + " labels (first divergent row " +
           std::to_string(std::min(labels.size(), f.rows)) + ")");
    return make_dataset(std::move(f.values), f.dim, labels);
  }
  if (format != DataFormat::csv) fail("load_dataset: unknown format");

  std::ifstream in(embeddings_path);
  if (!in) fail("load_dataset: cannot open '" + embeddings_path + "'");
  const bool combined = labels_path.empty();

  std::vector<float> values;
  std::vector<std::int64_t> labels;
  std::size_t dim = 0;
  std::string line;
  std::size_t lineno = 0, row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    std::size_t fi = 0;
    std::int64_t label = 0;
    if (combined) {
      if (!parse_i64(fields[0], label)) {
        if (row == 0) continue;  // header
        fail("load_dataset: '" + embeddings_path + "' row " + std::to_string(lineno) +
             ": first column is not an integer label");
      }
      fi = 1;
    } else {
      double probe;
      if (!parse_double(fields[0], probe) && row == 0) continue;  // header
    }
    const std::size_t row_dim = fields.size() - fi;
    if (row_dim == 0)
      fail("load_dataset: '" + embeddings_path + "' row " + std::to_string(lineno) + ": no features");
    if (dim == 0) dim = row_dim;
    if (row_dim != dim)
      fail("load_dataset: '" + embeddings_path + "' row " + std::to_string(lineno) +
           ": dimension mismatch, expected " + std::to_string(dim) + " features, got " +
           std::to_string(row_dim));
    for (std::size_t j = fi; j < fields.size(); ++j) {
      double v;
      if (!parse_double(fields[j], v))
        fail("load_dataset: '" + embeddings_path + "' row " + std::to_string(lineno) + ", column " +
             std::to_string(j) + ": not a number");
      if (!std::isfinite(v))
        fail("load_dataset: '" + embeddings_path + "' row " + std::to_string(lineno) + ", column " +
             std::to_string(j) + ": non-finite feature value");
      values.push_back(float(v));
    }
    if (combined) labels.push_back(label);
    ++row;
  }
  if (row == 0) fail("load_dataset: '" + embeddings_path + "' is empty");
  if (!combined) {
    labels = read_label_file(labels_path);
    if (labels.size() != row)
      fail("load_dataset: dimension mismatch: " + std::to_string(row) + " embedding rows vs " +
           std::to_string(labels.size()) + " labels");
  }
  return make_dataset(std::move(values), dim, labels);
}

EmbeddingDataset l2_normalize(const EmbeddingDataset& in) {
  EmbeddingDataset out = in;
  for (std::size_t i = 0; i < in.rows; ++i) {
    const float* r = in.row_ptr(i);
    const double norm = std::sqrt(simd::dot(r, r, in.dim));
    if (norm == 0.0) fail("l2_normalize: zero-norm row " + std::to_string(i));
    if (std::abs(norm - 1.0) <= 1e-6) continue;  // already unit; keep bits stable
    float* w = out.values.data() + i * in.dim;
    for (std::size_t j = 0; j < in.dim; ++j) w[j] = float(double(r[j]) / norm);
  }
  return out;
}

EmbeddingDataset with_labels(const EmbeddingDataset& in, std::vector<int> labels) {
  if (labels.size() != in.rows) fail("with_labels: label count mismatch");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 0 || labels[i] >= in.num_classes)
      fail("with_labels: label out of range at row " + std::to_string(i));
  EmbeddingDataset out = in;
  out.labels = std::move(labels);
  return out;
}

void save_dataset_binary(const EmbeddingDataset& ds, const std::string& embeddings_path,
                         const std::string& labels_path) {
  {
    std::ofstream out(embeddings_path, std::ios::binary);
    if (!out) fail("save_dataset_binary: cannot open '" + embeddings_path + "'");
    out.write("EMB1", 4);
    put_u32(out, std::uint32_t(ds.rows));
    put_u32(out, std::uint32_t(ds.dim));
    for (float v : ds.values) put_f32(out, v);
    if (!out.good()) fail("save_dataset_binary: write failed on '" + embeddings_path + "'");
  }
  std::vector<std::int64_t> original(ds.rows);
  for (std::size_t i = 0; i < ds.rows; ++i) original[i] = ds.label_map[ds.labels[i]];
  write_label_file(labels_path, original, /*binary=*/true);
}

void save_dataset_csv(const EmbeddingDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("save_dataset_csv: cannot open '" + path + "'");
  out << "label";
  for (std::size_t j = 0; j < ds.dim; ++j) out << ",f" << j;
  out << "\n";
  char buf[64];
  for (std::size_t i = 0; i < ds.rows; ++i) {
    out << ds.label_map[ds.labels[i]];
    const float* r = ds.row_ptr(i);
    for (std::size_t j = 0; j < ds.dim; ++j) {
      std::snprintf(buf, sizeof buf, "%.9g", double(r[j]));
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out.good()) fail("save_dataset_csv: write failed on '" + path + "'");
}

std::vector<std::int64_t> read_label_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("read_label_file: cannot open '" + path + "'");
  char m[4];
  in.read(m, 4);
  if (in.gcount() == 4 && std::memcmp(m, "LBL1", 4) == 0) return read_lbl1(in, path);
  return read_text_labels(path);
}

void write_label_file(const std::string& path, std::span<const std::int64_t> labels, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) fail("write_label_file: cannot open '" + path + "'");
  if (binary) {
    out.write("LBL1", 4);
    put_u32(out, std::uint32_t(labels.size()));
    for (std::int64_t v : labels) put_i32(out, std::int32_t(v));
  } else {
    for (std::int64_t v : labels) out << v << "\n";
  }
  if (!out.good()) fail("write_label_file: write failed on '" + path + "'");
}

}  // namespace nnklab
