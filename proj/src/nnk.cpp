#include "nnklab/nnk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nnklab/simd.hpp"

namespace nnklab {

namespace {

constexpr double kDualTol = 1e-8;   // dual feasibility threshold
constexpr double kPruneTol = 1e-8;  // coefficient pruning before renormalization
constexpr double kPivotTol = 1e-12; // Cholesky pivot floor (unit-diagonal scale)

// Cholesky solve of K[active,active] z = ksq[active]; false on a collapsed
// pivot (candidate linearly dependent on the active set).
bool solve_active_subsystem(std::span<const double> kss, std::size_t k,
                            const std::vector<std::size_t>& active,
                            std::span<const double> ksq, std::vector<double>& z) {
  const std::size_t m = active.size();
  std::vector<double> chol(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = kss[active[i] * k + active[j]];
      for (std::size_t p = 0; p < j; ++p) s -= chol[i * m + p] * chol[j * m + p];
      if (i == j) {
        if (s < kPivotTol) return false;
        chol[i * m + i] = std::sqrt(s);
      } else {
        chol[i * m + j] = s / chol[j * m + j];
      }
    }
  }
  z.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {  // forward: L y = b
    double s = ksq[active[i]];
    for (std::size_t p = 0; p < i; ++p) s -= chol[i * m + p] * z[p];
    z[i] = s / chol[i * m + i];
  }
  for (std::size_t ii = m; ii-- > 0;) {  // backward: L^T z = y
    double s = z[ii];
    for (std::size_t p = ii + 1; p < m; ++p) s -= chol[p * m + ii] * z[p];
    z[ii] = s / chol[ii * m + ii];
  }
  return true;
}

void validate_program(std::span<const double> kss, std::span<const double> ksq) {
  const std::size_t k = ksq.size();
  if (k == 0) throw std::invalid_argument("solve_nnk_coefficients: empty candidate set");
  if (kss.size() != k * k)
    throw std::invalid_argument("solve_nnk_coefficients: kernel matrix is not k x k");
  for (double v : ksq)
    if (!std::isfinite(v)) throw std::invalid_argument("solve_nnk_coefficients: non-finite input");
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double v = kss[i * k + j];
      if (!std::isfinite(v)) throw std::invalid_argument("solve_nnk_coefficients: non-finite input");
      if (std::abs(v - kss[j * k + i]) > 1e-9)
        throw std::invalid_argument("solve_nnk_coefficients: kernel matrix is not symmetric");
    }
  }
}

}  // namespace

std::vector<double> solve_nnk_coefficients(std::span<const double> kss,
                                           std::span<const double> ksq) {
  validate_program(kss, ksq);
  const std::size_t k = ksq.size();

  std::vector<double> theta(k, 0.0);
  std::vector<double> grad(k);  // K theta - ksq
  for (std::size_t i = 0; i < k; ++i) grad[i] = -ksq[i];

  std::vector<char> in_active(k, 0), banned(k, 0);
  std::vector<std::size_t> active;
  std::vector<double> z;

  const std::size_t iter_cap = 10 * k;
  std::size_t iters = 0;

  auto refresh_gradient = [&] {
    for (std::size_t i = 0; i < k; ++i) {
      double s = -ksq[i];
      for (std::size_t j = 0; j < k; ++j) s += kss[i * k + j] * theta[j];
      grad[i] = s;
    }
  };

  while (true) {
    // Most negative gradient among inactive candidates; ascending scan with a
    // strict compare keeps the lowest index on ties.
    std::size_t enter = no_index;
    double best = -kDualTol;
    for (std::size_t j = 0; j < k; ++j) {
      if (in_active[j] || banned[j]) continue;
      if (grad[j] < best) {
        best = grad[j];
        enter = j;
      }
    }
    if (enter == no_index) break;  // KKT satisfied

    active.push_back(enter);
    in_active[enter] = 1;

    bool entering = true;
    while (true) {
      if (++iters > iter_cap)
        throw std::runtime_error("solve_nnk_coefficients: no convergence within iteration cap (" +
                                 std::to_string(iter_cap) + ")");
      const bool solved = solve_active_subsystem(kss, k, active, ksq, z);
      if (!solved || (entering && z.back() <= 0.0)) {
        // Linearly dependent on the current support (duplicate candidate) or
        // numerically unable to enter: drop it for good.
        in_active[enter] = 0;
        banned[enter] = 1;
        for (std::size_t a = 0; a < active.size(); ++a) {
          if (active[a] == enter) {
            active.erase(active.begin() + std::ptrdiff_t(a));
            break;
          }
        }
        break;
      }
      entering = false;
      bool feasible = true;
      for (double v : z)
        if (v <= 0.0) {
          feasible = false;
          break;
        }
      if (feasible) {
        for (std::size_t a = 0; a < active.size(); ++a) theta[active[a]] = z[a];
        break;
      }
      // Step toward z until the first coefficient hits zero.
      double alpha = 1.0;
      for (std::size_t a = 0; a < active.size(); ++a) {
        if (z[a] <= 0.0) {
          const double t = theta[active[a]] / (theta[active[a]] - z[a]);
          alpha = std::min(alpha, t);
        }
      }
      for (std::size_t a = 0; a < active.size(); ++a) {
        const std::size_t j = active[a];
        theta[j] += alpha * (z[a] - theta[j]);
      }
      std::vector<std::size_t> kept;
      kept.reserve(active.size());
      for (std::size_t j : active) {
        if (theta[j] <= 1e-14) {
          theta[j] = 0.0;
          in_active[j] = 0;
        } else {
          kept.push_back(j);
        }
      }
      active.swap(kept);
      if (active.empty()) break;
    }
    refresh_gradient();
  }
  return theta;
}

double nnk_kkt_residual(std::span<const double> kss, std::span<const double> ksq,
                        std::span<const double> theta) {
  const std::size_t k = ksq.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double g = -ksq[i];
    for (std::size_t j = 0; j < k; ++j) g += kss[i * k + j] * theta[j];
    worst = std::max(worst, theta[i] > 0.0 ? std::abs(g) : std::max(0.0, -g));
  }
  return worst;
}

NnkNeighborhood build_neighborhood(const EmbeddingDataset& dataset, std::span<const float> query,
                                   const KernelConfig& config,
                                   const std::function<bool(int)>* candidate_filter,
                                   std::size_t exclude, std::int64_t query_ref) {
  const KernelConfig cfg = resolve_kernel_config(config, dataset.dim);
  const auto candidates = nearest_candidates(dataset, query, cfg.k_init, exclude, candidate_filter);
  if (candidates.empty()) throw std::runtime_error("build_neighborhood: empty candidate pool");

  const std::size_t k = candidates.size();
  std::vector<double> ksq(k), kss(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    ksq[i] = gaussian_kernel_from_d2(candidates[i].first, cfg.sigma);
    kss[i * k + i] = 1.0;
    const float* ri = dataset.row_ptr(candidates[i].second);
    for (std::size_t j = 0; j < i; ++j) {
      const float* rj = dataset.row_ptr(candidates[j].second);
      const double v = gaussian_kernel_from_d2(simd::l2sq(ri, rj, dataset.dim), cfg.sigma);
      kss[i * k + j] = v;
      kss[j * k + i] = v;
    }
  }

  const std::vector<double> theta = solve_nnk_coefficients(kss, ksq);

  NnkNeighborhood nb;
  nb.query_ref = query_ref;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (theta[i] <= kPruneTol) continue;
    nb.neighbor_indices.push_back(candidates[i].second);
    nb.raw_coefficients.push_back(theta[i]);
    nb.kernel_values.push_back(ksq[i]);
    total += theta[i];
  }
  if (nb.neighbor_indices.empty()) {
    // All coefficients vanished numerically; keep the strongest candidate.
    std::size_t best = 0;
    for (std::size_t i = 1; i < k; ++i)
      if (theta[i] > theta[best]) best = i;
    nb.neighbor_indices.push_back(candidates[best].second);
    nb.raw_coefficients.push_back(theta[best]);
    nb.kernel_values.push_back(ksq[best]);
    nb.weights.push_back(1.0);
    return nb;
  }
  nb.weights.resize(nb.raw_coefficients.size());
  for (std::size_t i = 0; i < nb.weights.size(); ++i)
    nb.weights[i] = nb.raw_coefficients[i] / total;
  return nb;
}

double polytope_diameter(const EmbeddingDataset& dataset, std::span<const std::size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("polytope_diameter: empty index set");
  double max_d2 = 0.0;
  for (std::size_t a = 0; a < indices.size(); ++a) {
    const float* ra = dataset.row_ptr(indices[a]);
    for (std::size_t b = a + 1; b < indices.size(); ++b) {
      max_d2 = std::max(max_d2, simd::l2sq(ra, dataset.row_ptr(indices[b]), dataset.dim));
    }
  }
  return std::sqrt(max_d2);
}

}  // namespace nnklab
