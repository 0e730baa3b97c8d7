#pragma once
// Non-negative kernel regression neighborhoods. For a query x and candidate
// set S, the coefficients solve
//
//     min_{theta >= 0}  1/2 theta^T K_SS theta - K_Sq^T theta
//
// where K_SS is the kernel matrix among candidates and K_Sq the kernel vector
// against the query. Candidates that are geometrically redundant (occluded by
// nearer points) receive zero coefficients; the survivors define a sparse
// polytope around the query and their normalized coefficients act as
// interpolation weights.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nnklab/dataset.hpp"
#include "nnklab/geometry.hpp"

namespace nnklab {

struct NnkNeighborhood {
  std::int64_t query_ref = -1;  // sample id when the query is a training row, -1 otherwise
  std::vector<std::size_t> neighbor_indices;  // surviving candidates, ascending distance
  std::vector<double> weights;                // normalized, sum to 1
  std::vector<double> raw_coefficients;       // theta before normalization
  std::vector<double> kernel_values;          // kernel(query, neighbor)
};

// Active-set (Lawson-Hanson style) solver for the quadratic program above.
// kss is a k*k row-major symmetric matrix with entries in (0,1], ksq the
// length-k right-hand side. Returns theta >= 0 satisfying the KKT conditions
// to within dual tolerance 1e-8. Degenerate (duplicate-candidate) instances
// resolve deterministically: candidates are scanned in ascending index order,
// so mass lands on the lowest index.
std::vector<double> solve_nnk_coefficients(std::span<const double> kss,
                                           std::span<const double> ksq);

// Max KKT violation of theta for the program above:
// |grad_i| on the support, max(0, -grad_i) off it.
double nnk_kkt_residual(std::span<const double> kss, std::span<const double> ksq,
                        std::span<const double> theta);

// k_init nearest candidates (optionally label-filtered, optionally excluding
// one row), solve for coefficients, prune entries <= 1e-8 and renormalize.
NnkNeighborhood build_neighborhood(const EmbeddingDataset& dataset, std::span<const float> query,
                                   const KernelConfig& config,
                                   const std::function<bool(int)>* candidate_filter = nullptr,
                                   std::size_t exclude = no_index, std::int64_t query_ref = -1);

// Maximum pairwise Euclidean distance among the indexed rows; 0 for a
// singleton, error for an empty set.
double polytope_diameter(const EmbeddingDataset& dataset, std::span<const std::size_t> indices);

}  // namespace nnklab
