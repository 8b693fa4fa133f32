#include "vrsg/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vrsg/errors.hpp"
#include "vrsg/sampling.hpp"

namespace vrsg {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

void append_double(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

}  // namespace

Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options) {
  std::vector<SparseRow> rows;
  std::vector<double> labels;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tokens = split_ws(view);
    if (tokens.empty()) continue;

    const auto label = parse_double(tokens[0]);
    if (!label) throw ParseError(line_no, "malformed label '" + std::string(tokens[0]) + "'");
    double y = *label;
    if (options.remap_zero_one && y == 0.0) y = -1.0;
    if (options.require_plus_minus_one && y != 1.0 && y != -1.0) {
      throw ParseError(line_no, "label " + std::string(tokens[0]) + " is not +1 or -1");
    }

    SparseRow row;
    row.reserve(tokens.size() - 1);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "expected idx:value, got '" + std::string(tok) + "'");
      }
      const auto idx = parse_index(tok.substr(0, colon));
      if (!idx || *idx == 0) {
        throw ParseError(line_no, "feature index must be a positive integer in '" + std::string(tok) + "'");
      }
      const auto val = parse_double(tok.substr(colon + 1));
      if (!val) throw ParseError(line_no, "malformed feature value in '" + std::string(tok) + "'");
      if (options.n_features && *idx > *options.n_features) {
        throw ParseError(line_no, "feature index " + std::to_string(*idx) + " exceeds " +
                                      std::to_string(*options.n_features));
      }
      row.push_back({*idx - 1, *val});
      max_index = std::max(max_index, *idx);
    }
    std::sort(row.begin(), row.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (row[k].index == row[k - 1].index) {
        throw ParseError(line_no, "duplicate feature index " + std::to_string(row[k].index + 1));
      }
    }
    rows.push_back(std::move(row));
    labels.push_back(y);
  }
  if (rows.empty()) throw InvalidArgument("libsvm input contains no data lines");

  Dataset data;
  data.matrix = SparseDesignMatrix(options.n_features.value_or(max_index), rows);
  data.labels = Eigen::Map<const Vector>(labels.data(), ix(labels.size()));
  return data;
}

Dataset read_libsvm(const std::filesystem::path& path, const LibsvmOptions& options) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open libsvm file " + path.string());
  return parse_libsvm(in, options);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  std::string line;
  for (std::size_t i = 0; i < data.matrix.n_rows(); ++i) {
    line.clear();
    append_double(line, data.labels[ix(i)]);
    for (const auto& e : data.matrix.row(i)) {
      line.push_back(' ');
      line += std::to_string(e.index + 1);
      line.push_back(':');
      append_double(line, e.value);
    }
    line.push_back('\n');
    out << line;
  }
}

void write_libsvm(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write libsvm file " + path.string());
  write_libsvm(out, data);
}

void SyntheticSpec::validate() const {
  if (n < 1 || d < 1) throw InvalidArgument("synthetic data needs n, d >= 1");
  if (rank < 1 || rank > std::min(n, d)) throw InvalidArgument("synthetic rank must be in [1, min(n, d)]");
  if (!(noise_std >= 0.0)) throw InvalidArgument("noise_std must be nonnegative");
  if (!(row_scale_spread >= 1.0) || !std::isfinite(row_scale_spread)) {
    throw InvalidArgument("row_scale_spread must be >= 1");
  }
}

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SplitMix64 rng(spec.seed);
  std::normal_distribution<double> normal;
  const auto gaussian = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    // Fill row by row so the draw order does not depend on Eigen's storage order.
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    }
    return m;
  };
  const auto n = ix(spec.n);
  const auto d = ix(spec.d);
  const Matrix a = gaussian(n, ix(spec.rank));
  const Matrix b = gaussian(ix(spec.rank), d);
  Matrix x = a * b;

  std::vector<double> u(spec.n);
  for (auto& v : u) v = rng.uniform();
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  const double lo_v = *lo;
  const double span = *hi - *lo;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = span > 0.0 ? (u[static_cast<std::size_t>(i)] - lo_v) / span : 0.0;
    const double target = std::pow(spec.row_scale_spread, t);
    const double norm = x.row(i).norm();
    if (norm > 0.0) x.row(i) *= target / norm;
  }

  Vector planted = gaussian(d, 1).col(0);
  planted /= planted.norm();
  Vector margin = x * planted;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (spec.noise_std > 0.0) margin[i] += spec.noise_std * normal(rng);
  }
  Vector labels(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    labels[i] = spec.task == LossKind::Logistic ? (margin[i] >= 0.0 ? 1.0 : -1.0) : margin[i];
  }

  SyntheticData out;
  out.data.matrix = SparseDesignMatrix::from_dense(x);
  out.data.labels = labels;
  out.planted = planted;
  out.ground_truth_rank = numerical_rank(out.data.matrix);
  return out;
}

std::size_t numerical_rank(const SparseDesignMatrix& x) {
  const Matrix dense = x.to_dense();
  if (dense.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(dense);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s[k] > 1e-8 * s[0]) ++r;
  }
  return r;
}

}  // namespace vrsg
