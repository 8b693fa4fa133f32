#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>

#include "vrsg/problem.hpp"

namespace vrsg {

struct Dataset {
  SparseDesignMatrix matrix;
  Vector labels;
};

struct LibsvmOptions {
  bool remap_zero_one = false;        // map labels {0, 1} to {-1, +1}
  bool require_plus_minus_one = false;  // logistic mode: reject other labels
  std::optional<std::size_t> n_features;  // default: the largest index seen
};

/// Reads `<label> <idx>:<val> ...` lines with 1-based indices. Blank lines and
/// `#` comments are skipped. Features within a line may be unsorted but not
/// repeated.
Dataset read_libsvm(const std::filesystem::path& path, const LibsvmOptions& options = {});
Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options = {});

// Writes values with round-trip (shortest exact) decimal rendering.
void write_libsvm(const std::filesystem::path& path, const Dataset& data);
void write_libsvm(std::ostream& out, const Dataset& data);

struct SyntheticSpec {
  std::size_t n = 100;
  std::size_t d = 20;
  std::size_t rank = 10;
  double noise_std = 0.0;
  LossKind task = LossKind::LeastSquares;
  double row_scale_spread = 1.0;  // max ||x_i|| / min ||x_i||
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticData {
  Dataset data;
  std::size_t ground_truth_rank = 0;
  Vector planted;
};

/// X = A B with Gaussian A (n x rank) and B (rank x d), rows rescaled to
/// norms spanning [1, spread]; labels from a planted parameter plus noise
/// (sign of the noisy margin for logistic).
SyntheticData gen_synthetic(const SyntheticSpec& spec);

// Singular values above 1e-8 * sigma_max.
std::size_t numerical_rank(const SparseDesignMatrix& x);

}  // namespace vrsg
