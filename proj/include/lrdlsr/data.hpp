#pragma once

// Everything between feature files and solver-ready matrices: text dataset
// I/O, unit-length column normalization, seeded per-class splits, PCA by
// retained energy and a synthetic Gaussian-cluster generator.

#include "lrdlsr/matrix_core.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace lrdlsr {

/// Column-per-sample features with 0-based contiguous class ids. class_names
/// holds the original label token of each id.
struct Dataset {
  Matrix features;  // d x n
  std::vector<int> labels;
  std::vector<std::string> class_names;

  Index dim() const { return features.rows(); }
  Index size() const { return features.cols(); }
  int num_classes() const { return static_cast<int>(class_names.size()); }
  std::vector<std::size_t> class_sizes() const;

  /// Throws DataError if labels and features disagree or values are non-finite.
  void validate() const;
};

/// Parses `label,v1,...,vd` records. Blank lines and lines starting with '#'
/// are skipped. Labels are remapped to ids in order of first occurrence.
Dataset parse_dataset(std::istream& in);
Dataset load_dataset(const std::string& path);

/// Writes the normative text format with shortest round-trip decimals.
void write_dataset(const Dataset& ds, std::ostream& out);
void save_dataset(const Dataset& ds, const std::string& path);

struct NormalizeResult {
  Dataset dataset;
  /// Columns that were all zero and were left untouched.
  std::vector<Index> zero_columns;
};

/// Scales every sample to unit Euclidean length.
NormalizeResult normalize_columns(const Dataset& ds);
Matrix normalize_columns(const Matrix& x);

struct SplitSpec {
  std::size_t train_per_class = 1;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  /// Source column of every train/test sample, ascending within each part.
  std::vector<Index> train_indices;
  std::vector<Index> test_indices;
};

/// Draws train_per_class samples per class uniformly without replacement.
/// Both parts keep file order and the full class table of ds.
SplitResult split(const Dataset& ds, const SplitSpec& spec);

struct PcaModel {
  Vector mean;         // d
  Matrix basis;        // d x k, orthonormal columns
  double retained_energy = 0.0;

  Index components() const { return basis.cols(); }
};

/// Smallest k whose cumulative share of squared singular values of the
/// mean-centered features reaches `energy`.
PcaModel pca_fit(const Dataset& ds, double energy);
Dataset pca_apply(const PcaModel& model, const Dataset& ds);

/// Seeded random source whose draws are identical on every platform:
/// std::mt19937_64 is fully specified, and the derived distributions below
/// avoid the implementation-defined std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Uniform double in [0, 1).
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
};

struct SynthSpec {
  int classes = 3;
  std::size_t per_class = 20;
  Index dim = 10;
  /// Distance of every class mean from the origin, in noise standard deviations.
  double separation = 3.0;
  /// Share of each sample's noise variance drawn from a class-specific
  /// low-rank subspace (0 gives isotropic noise).
  double correlation = 0.0;
  Index correlation_rank = 2;
  std::uint64_t seed = 0;
};

/// Gaussian clusters, samples grouped by class, labels named c1..cC.
Dataset generate_synthetic(const SynthSpec& spec);

}  // namespace lrdlsr
