#include "lrdlsr/data.hpp"

#include "lrdlsr/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_map>

namespace lrdlsr {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Dataset subset(const Dataset& ds, const std::vector<Index>& cols) {
  Dataset out;
  out.features.resize(ds.dim(), static_cast<Index>(cols.size()));
  out.labels.reserve(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.features.col(static_cast<Index>(j)) = ds.features.col(cols[j]);
    out.labels.push_back(ds.labels[static_cast<std::size_t>(cols[j])]);
  }
  out.class_names = ds.class_names;
  return out;
}

}  // namespace

std::vector<std::size_t> Dataset::class_sizes() const {
  std::vector<std::size_t> sizes(class_names.size(), 0);
  for (int k : labels) ++sizes.at(static_cast<std::size_t>(k));
  return sizes;
}

void Dataset::validate() const {
  if (static_cast<Index>(labels.size()) != features.cols()) {
    throw DataError("dataset: " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(features.cols()) + " samples");
  }
  for (int k : labels) {
    if (k < 0 || k >= num_classes()) throw DataError("dataset: label id out of range");
  }
  if (!features.allFinite()) throw DataError("dataset: non-finite feature value");
}

Dataset parse_dataset(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<std::string> names;
  std::unordered_map<std::string, int> ids;
  std::size_t width = 0;
  std::size_t first_line = 0;

  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;

    std::vector<std::string_view> fields;
    for (std::size_t start = 0;;) {
      const auto comma = text.find(',', start);
      fields.push_back(trim(text.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() < 2) throw DataError("expected a label and at least one value", line_no);
    if (fields[0].empty()) throw DataError("empty label", line_no, 1);

    std::vector<double> values(fields.size() - 1);
    for (std::size_t f = 1; f < fields.size(); ++f) {
      const auto cell = fields[f];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw DataError("non-numeric value '" + std::string(cell) + "'", line_no, f + 1);
      }
      if (!std::isfinite(v)) throw DataError("non-finite value", line_no, f + 1);
      values[f - 1] = v;
    }
    if (rows.empty()) {
      width = values.size();
      first_line = line_no;
    } else if (values.size() != width) {
      throw DataError("row has " + std::to_string(values.size()) + " values, expected " +
                          std::to_string(width) + " (from line " + std::to_string(first_line) + ")",
                      line_no);
    }

    const std::string token(fields[0]);
    auto [it, inserted] = ids.try_emplace(token, static_cast<int>(names.size()));
    if (inserted) names.push_back(token);
    labels.push_back(it->second);
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError("dataset contains no samples");

  Dataset ds;
  ds.features.resize(static_cast<Index>(width), static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    ds.features.col(static_cast<Index>(j)) =
        Eigen::Map<const Vector>(rows[j].data(), static_cast<Index>(width));
  }
  ds.labels = std::move(labels);
  ds.class_names = std::move(names);
  return ds;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  try {
    return parse_dataset(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_dataset(const Dataset& ds, std::ostream& out) {
  ds.validate();
  std::string line;
  char buf[64];
  for (Index j = 0; j < ds.size(); ++j) {
    line = ds.class_names[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(j)])];
    for (Index i = 0; i < ds.dim(); ++i) {
      const auto res = std::to_chars(buf, buf + sizeof buf, ds.features(i, j));
      line += ',';
      line.append(buf, res.ptr);
    }
    line += '\n';
    out << line;
  }
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_dataset(ds, out);
  if (!out) throw DataError("failed writing '" + path + "'");
}

Matrix normalize_columns(const Matrix& x) {
  Matrix out = x;
  for (Index j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    if (norm > 0.0) out.col(j) /= norm;
  }
  return out;
}

NormalizeResult normalize_columns(const Dataset& ds) {
  NormalizeResult result{ds, {}};
  for (Index j = 0; j < ds.size(); ++j) {
    if (ds.features.col(j).squaredNorm() == 0.0) result.zero_columns.push_back(j);
  }
  result.dataset.features = normalize_columns(ds.features);
  return result;
}

SplitResult split(const Dataset& ds, const SplitSpec& spec) {
  const auto sizes = ds.class_sizes();
  if (spec.train_per_class < 1) throw ParameterError("split: train_per_class must be at least 1");
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (spec.train_per_class > sizes[k]) {
      throw ParameterError("split: train_per_class " + std::to_string(spec.train_per_class) +
                           " exceeds the " + std::to_string(sizes[k]) + " samples of class '" +
                           ds.class_names[k] + "'");
    }
  }

  std::vector<std::vector<Index>> members(sizes.size());
  for (Index j = 0; j < ds.size(); ++j) {
    members[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(j)])].push_back(j);
  }

  Rng rng(spec.seed);
  std::vector<bool> in_train(static_cast<std::size_t>(ds.size()), false);
  for (auto& cls : members) {
    // Partial Fisher-Yates: the first train_per_class slots become the draw.
    for (std::size_t i = 0; i < spec.train_per_class; ++i) {
      const std::size_t pick = i + static_cast<std::size_t>(rng.below(cls.size() - i));
      std::swap(cls[i], cls[pick]);
      in_train[static_cast<std::size_t>(cls[i])] = true;
    }
  }

  SplitResult result;
  for (Index j = 0; j < ds.size(); ++j) {
    (in_train[static_cast<std::size_t>(j)] ? result.train_indices : result.test_indices).push_back(j);
  }
  result.train = subset(ds, result.train_indices);
  result.test = subset(ds, result.test_indices);
  return result;
}

PcaModel pca_fit(const Dataset& ds, double energy) {
  if (!(energy > 0.0 && energy <= 1.0)) throw ParameterError("pca: energy must lie in (0, 1]");
  PcaModel model;
  model.mean = ds.features.rowwise().mean();
  const Matrix centered = ds.features.colwise() - model.mean;
  const SvdFactors f = svd(centered);
  const Vector power = f.singular_values.array().square();
  const double total = power.sum();
  const Index rank = f.rank();
  if (!(total > 0.0) || rank == 0) throw DataError("pca: training features have no variance");

  Index k = 0;
  double kept = 0.0;
  // The relative slack only absorbs round-off in the cumulative sum; it
  // lets energy = 1 stop at the numerical rank.
  while (k < rank && kept < energy * total - 1e-12 * total) kept += power(k++);
  k = std::max<Index>(k, 1);
  model.basis = f.u.leftCols(k);
  model.retained_energy = power.head(k).sum() / total;
  return model;
}

Dataset pca_apply(const PcaModel& model, const Dataset& ds) {
  if (ds.dim() != model.mean.size()) {
    throw DimensionError("pca: model expects " + std::to_string(model.mean.size()) +
                         " features, dataset has " + std::to_string(ds.dim()));
  }
  Dataset out;
  out.features = model.basis.transpose() * (ds.features.colwise() - model.mean);
  out.labels = ds.labels;
  out.class_names = ds.class_names;
  return out;
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw ParameterError("rng: empty range");
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do v = engine_(); while (v >= limit);
  return v % bound;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  // Box-Muller; 1 - u keeps the logarithm finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Dataset generate_synthetic(const SynthSpec& spec) {
  if (spec.classes < 1 || spec.per_class < 1 || spec.dim < 1) {
    throw ParameterError("synthetic: classes, per_class and dim must be positive");
  }
  if (!(spec.correlation >= 0.0 && spec.correlation < 1.0)) {
    throw ParameterError("synthetic: correlation must lie in [0, 1)");
  }
  if (spec.correlation > 0.0 && spec.correlation_rank < 1) {
    throw ParameterError("synthetic: correlation_rank must be positive");
  }
  Rng rng(spec.seed);
  auto gaussian = [&rng](Index rows, Index cols) {
    Matrix g(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
    return g;
  };

  const Index d = spec.dim;
  const Index n = static_cast<Index>(spec.per_class) * spec.classes;
  const double iso = std::sqrt(1.0 - spec.correlation);
  const double shared =
      std::sqrt(spec.correlation * static_cast<double>(d) / static_cast<double>(spec.correlation_rank));

  Dataset ds;
  ds.features.resize(d, n);
  Index col = 0;
  for (int k = 0; k < spec.classes; ++k) {
    ds.class_names.push_back("c" + std::to_string(k + 1));
    Vector mean = gaussian(d, 1).col(0);
    mean *= spec.separation / std::max(mean.norm(), 1e-300);
    Matrix directions;
    if (spec.correlation > 0.0) directions = normalize_columns(gaussian(d, spec.correlation_rank));
    for (std::size_t s = 0; s < spec.per_class; ++s, ++col) {
      Vector x = mean + iso * gaussian(d, 1).col(0);
      if (spec.correlation > 0.0) x += shared * directions * gaussian(spec.correlation_rank, 1).col(0);
      ds.features.col(col) = x;
      ds.labels.push_back(k);
    }
  }
  return ds;
}

}  // namespace lrdlsr
