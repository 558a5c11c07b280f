#include "metricforge/model.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string_view>

#include "metricforge/error.hpp"

namespace metricforge {

namespace {

double psd_scale(const SymMatrix& m) { return std::max(1.0, m.max_abs()); }

}  // namespace

MetricModel::MetricModel(SymMatrix m, ModelMeta meta, std::optional<MetricCoefficients> coeffs)
    : m_(std::move(m)), meta_(std::move(meta)), coeffs_(std::move(coeffs)) {
  if (m_.dim() == 0) throw IntegrityError("MetricModel: empty matrix");
  if (!m_.all_finite()) throw IntegrityError("MetricModel: matrix has non-finite entries");
  const double scale = psd_scale(m_);
  const double lo = min_eigenvalue(m_);
  if (lo < -1e-8 * scale) {
    throw IntegrityError("MetricModel: matrix is not PSD (min eigenvalue " + std::to_string(lo) + ")");
  }
  if (coeffs_) {
    const auto& c = *coeffs_;
    if (c.dim != m_.dim() || c.diffs.size() != c.mu.size() * c.dim) {
      throw IntegrityError("MetricModel: coefficient shapes do not match the matrix");
    }
    SymMatrix rebuilt(c.dim);
    for (std::size_t p = 0; p < c.mu.size(); ++p) {
      if (c.mu[p] < 0) throw IntegrityError("MetricModel: negative coefficient");
      rebuilt.add_outer(std::span<const double>(c.diffs.data() + p * c.dim, c.dim), c.mu[p]);
    }
    if ((rebuilt - m_).max_abs() > 1e-8 * scale) {
      throw IntegrityError("MetricModel: coefficients do not reproduce the matrix");
    }
  }
}

MetricModel MetricModel::euclidean(std::size_t dim) {
  ModelMeta meta;
  meta.algorithm = "euclidean";
  meta.converged = true;
  return MetricModel(SymMatrix::identity(dim), meta);
}

double MetricModel::distance2(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != dim() || y.size() != dim()) {
    throw ArgumentError("distance2: expected vectors of length " + std::to_string(dim()));
  }
  std::vector<double> diff(dim());
  for (std::size_t k = 0; k < dim(); ++k) diff[k] = x[k] - y[k];
  const double d2 = m_.quad_form(diff);
  return d2 > 0.0 ? d2 : 0.0;
}

int predict_1nn(const MetricModel& model, const Dataset& train, std::span<const double> query) {
  if (train.size() == 0) throw ArgumentError("predict_1nn: empty training set");
  if (train.dim() != model.dim()) throw ArgumentError("predict_1nn: training data dimension mismatch");
  std::size_t best = 0;
  double best_d = model.distance2(train.row(0), query);
  for (std::size_t i = 1; i < train.size(); ++i) {
    const double d = model.distance2(train.row(i), query);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return train.label(best);
}

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) : text_(text) {}

  // Next line (without '\n'); throws ParseError at end of input.
  std::string_view next(const char* expecting) {
    if (pos_ > text_.size() || (pos_ == text_.size())) {
      throw ParseError(std::string("unexpected end of file, expecting ") + expecting, line_ + 1);
    }
    const auto nl = text_.find('\n', pos_);
    const auto end = nl == std::string::npos ? text_.size() : nl;
    std::string_view line(text_.data() + pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = nl == std::string::npos ? text_.size() + 1 : nl + 1;
    ++line_;
    return line;
  }
  bool only_blank_left() const {
    if (pos_ >= text_.size()) return true;
    return text_.find_first_not_of(" \t\r\n", pos_) == std::string::npos;
  }
  std::size_t line() const { return line_; }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

double parse_float(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("invalid number '" + std::string(s) + "'", line);
  }
  return v;
}

long long parse_int(std::string_view s, std::size_t line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("invalid integer '" + std::string(s) + "'", line);
  }
  return v;
}

std::string_view expect_key(LineReader& in, std::string_view key) {
  const auto line = in.next(std::string(key).c_str());
  if (line.size() <= key.size() || line.substr(0, key.size()) != key || line[key.size()] != ' ') {
    throw ParseError("expected '" + std::string(key) + " <value>'", in.line());
  }
  return line.substr(key.size() + 1);
}

}  // namespace

std::string format_model(const MetricModel& model) {
  const auto& meta = model.meta();
  std::string out = "metricforge-model v1\n";
  out += "algorithm " + meta.algorithm + "\n";
  out += "dim " + std::to_string(model.dim()) + "\n";
  out += "C " + fmt17(meta.C) + "\n";
  out += "eps " + fmt17(meta.eps) + "\n";
  out += "iterations " + std::to_string(meta.iterations) + "\n";
  out += std::string("converged ") + (meta.converged ? "1" : "0") + "\n";
  out += "final_gap " + fmt17(meta.final_gap) + "\n";
  const auto& m = model.matrix();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    for (std::size_t j = 0; j < m.dim(); ++j) {
      if (j) out += ' ';
      out += fmt17(m(i, j));
    }
    out += '\n';
  }
  return out;
}

RawModel parse_model(const std::string& text) {
  LineReader in(text);
  if (in.next("header") != "metricforge-model v1") {
    throw ParseError("missing 'metricforge-model v1' header", 1);
  }
  ModelMeta meta;
  meta.algorithm = std::string(expect_key(in, "algorithm"));
  if (meta.algorithm != "pcml" && meta.algorithm != "ncml" && meta.algorithm != "euclidean") {
    throw ParseError("unknown algorithm '" + meta.algorithm + "'", in.line());
  }
  const auto dim = parse_int(expect_key(in, "dim"), in.line());
  if (dim < 1 || dim > 100000) throw ParseError("dim out of range", in.line());
  meta.C = parse_float(expect_key(in, "C"), in.line());
  meta.eps = parse_float(expect_key(in, "eps"), in.line());
  const auto iters = parse_int(expect_key(in, "iterations"), in.line());
  if (iters < 0 || iters > 1'000'000'000) throw ParseError("iterations out of range", in.line());
  meta.iterations = static_cast<int>(iters);
  const auto conv = expect_key(in, "converged");
  if (conv != "0" && conv != "1") throw ParseError("converged must be 0 or 1", in.line());
  meta.converged = conv == "1";
  meta.final_gap = parse_float(expect_key(in, "final_gap"), in.line());

  const auto d = static_cast<std::size_t>(dim);
  std::vector<double> entries;
  entries.reserve(d * d);
  for (std::size_t r = 0; r < d; ++r) {
    const auto line = in.next("matrix row");
    std::size_t count = 0, start = 0;
    while (start <= line.size()) {
      auto sp = line.find(' ', start);
      if (sp == std::string_view::npos) sp = line.size();
      entries.push_back(parse_float(line.substr(start, sp - start), in.line()));
      ++count;
      start = sp + 1;
    }
    if (count != d) {
      throw ParseError("matrix row has " + std::to_string(count) + " entries, expected " +
                           std::to_string(d),
                       in.line());
    }
  }
  if (!in.only_blank_left()) throw ParseError("unexpected trailing content", in.line() + 1);

  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (entries[i * d + j] != entries[j * d + i]) {
        throw IntegrityError("model matrix is not symmetric at (" + std::to_string(i) + ", " +
                             std::to_string(j) + ")");
      }
    }
  }
  // already symmetric, so from_dense reproduces the entries bit for bit
  return {std::move(meta), SymMatrix::from_dense(d, entries)};
}

MetricModel load_model_text(const std::string& text) {
  auto raw = parse_model(text);
  return MetricModel(std::move(raw.m), std::move(raw.meta));
}

void save_model(const MetricModel& model, const std::filesystem::path& path) {
  write_text_file_atomic(path, format_model(model));
}

MetricModel load_model(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  try {
    return load_model_text(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const IntegrityError& e) {
    throw IntegrityError(path.string() + ": " + e.what());
  }
}

}  // namespace metricforge
