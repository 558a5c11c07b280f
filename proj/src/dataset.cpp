#include "metricforge/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string_view>
#include <system_error>

#include "metricforge/error.hpp"

namespace metricforge {

Dataset::Dataset(std::size_t dim, std::vector<double> features, std::vector<int> labels)
    : dim_(dim), features_(std::move(features)), labels_(std::move(labels)) {
  if (dim_ == 0) throw ArgumentError("Dataset: dimension must be >= 1");
  if (labels_.empty()) throw ArgumentError("Dataset: no samples");
  if (features_.size() != labels_.size() * dim_) {
    throw ArgumentError("Dataset: expected " + std::to_string(labels_.size() * dim_) +
                        " feature values, got " + std::to_string(features_.size()));
  }
  for (std::size_t k = 0; k < features_.size(); ++k) {
    if (!std::isfinite(features_[k])) {
      throw ArgumentError("Dataset: non-finite feature at sample " + std::to_string(k / dim_) +
                          ", column " + std::to_string(k % dim_));
    }
  }
}

std::vector<int> Dataset::classes() const {
  std::set<int> s(labels_.begin(), labels_.end());
  return {s.begin(), s.end()};
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<double> f;
  std::vector<int> l;
  f.reserve(indices.size() * dim_);
  l.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= size()) throw ArgumentError("Dataset::subset: index out of range");
    auto r = row(i);
    f.insert(f.end(), r.begin(), r.end());
    l.push_back(labels_[i]);
  }
  return Dataset(dim_, std::move(f), std::move(l));
}

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("squared_euclidean: length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> to_integer(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  // tolerate "3.0"-style integral labels
  auto d = to_double(s);
  if (d && std::isfinite(*d) && std::floor(*d) == *d && std::abs(*d) < 1e15) {
    return static_cast<long long>(*d);
  }
  return std::nullopt;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename F>
void for_each_line(const std::string& text, F&& f) {
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    const std::string_view line(text.data() + start,
                                (pos == std::string::npos ? text.size() : pos) - start);
    ++lineno;
    f(lineno, line);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
}

int checked_label(long long v, std::size_t lineno) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ParseError("label out of range", lineno);
  }
  return static_cast<int>(v);
}

}  // namespace

Dataset parse_csv_dataset(const std::string& text) {
  std::vector<double> features;
  std::vector<int> labels;
  std::size_t dim = 0;
  bool seen_row = false;
  for_each_line(text, [&](std::size_t lineno, std::string_view raw) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    const auto fields = split(line, ',');
    if (fields.size() < 2) throw ParseError("expected at least one feature and a label", lineno);
    std::vector<double> row;
    row.reserve(fields.size() - 1);
    bool numeric = true;
    for (std::size_t c = 0; c + 1 < fields.size(); ++c) {
      auto v = to_double(fields[c]);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    auto label = numeric ? to_integer(fields.back()) : std::nullopt;
    if (!numeric || !label) {
      if (!seen_row && labels.empty()) {
        seen_row = true;  // header line
        return;
      }
      throw ParseError("non-numeric field or non-integer label", lineno);
    }
    seen_row = true;
    if (dim == 0) {
      dim = row.size();
    } else if (row.size() != dim) {
      throw ParseError("expected " + std::to_string(dim) + " features, got " +
                           std::to_string(row.size()),
                       lineno);
    }
    for (double x : row) {
      if (!std::isfinite(x)) throw ParseError("non-finite feature value", lineno);
    }
    features.insert(features.end(), row.begin(), row.end());
    labels.push_back(checked_label(*label, lineno));
  });
  if (labels.empty()) throw ParseError("dataset has no samples");
  return Dataset(dim, std::move(features), std::move(labels));
}

Dataset parse_libsvm_dataset(const std::string& text, std::size_t min_dim) {
  struct Record {
    int label;
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<Record> records;
  std::size_t dim = min_dim;
  for_each_line(text, [&](std::size_t lineno, std::string_view raw) {
    auto line = trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) return;
    std::vector<std::string_view> tokens;
    for (auto tok : split(line, ' ')) {
      for (auto t : split(tok, '\t')) {
        if (!trim(t).empty()) tokens.push_back(trim(t));
      }
    }
    auto label = to_integer(tokens.front());
    if (!label) throw ParseError("invalid label '" + std::string(tokens.front()) + "'", lineno);
    Record rec{checked_label(*label, lineno), {}};
    std::size_t last_index = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto colon = tokens[t].find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("expected idx:val, got '" + std::string(tokens[t]) + "'", lineno);
      }
      auto idx = to_integer(tokens[t].substr(0, colon));
      auto val = to_double(tokens[t].substr(colon + 1));
      if (!idx || *idx < 1) throw ParseError("feature index must be >= 1", lineno);
      if (!val || !std::isfinite(*val)) throw ParseError("invalid feature value", lineno);
      const auto index = static_cast<std::size_t>(*idx);
      if (index <= last_index) throw ParseError("feature indices must be increasing", lineno);
      last_index = index;
      rec.entries.emplace_back(index - 1, *val);
      dim = std::max(dim, index);
    }
    records.push_back(std::move(rec));
  });
  if (records.empty()) throw ParseError("dataset has no samples");
  if (dim == 0) throw ParseError("dataset has no features");
  std::vector<double> features(records.size() * dim, 0.0);
  std::vector<int> labels;
  labels.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (auto [j, v] : records[i].entries) features[i * dim + j] = v;
    labels.push_back(records[i].label);
  }
  return Dataset(dim, std::move(features), std::move(labels));
}

Dataset read_dataset(const std::filesystem::path& path, DataFormat format) {
  const auto text = read_text_file(path);
  try {
    return format == DataFormat::kCsv ? parse_csv_dataset(text) : parse_libsvm_dataset(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string format_csv_dataset(const Dataset& data) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double x : data.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g,", x);
      out += buf;
    }
    out += std::to_string(data.label(i));
    out += '\n';
  }
  return out;
}

std::vector<LabeledPair> parse_pair_file(const std::string& text) {
  std::vector<LabeledPair> pairs;
  bool header_allowed = true;
  for_each_line(text, [&](std::size_t lineno, std::string_view raw) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    const auto fields = split(line, ',');
    auto a = fields.size() == 3 ? to_integer(fields[0]) : std::nullopt;
    auto b = fields.size() == 3 ? to_integer(fields[1]) : std::nullopt;
    auto m = fields.size() == 3 ? to_integer(fields[2]) : std::nullopt;
    if (!a || !b || !m) {
      if (header_allowed) {
        header_allowed = false;
        return;
      }
      throw ParseError("expected 'idx_a,idx_b,matched'", lineno);
    }
    header_allowed = false;
    if (*a < 0 || *b < 0) throw ParseError("pair indices must be >= 0", lineno);
    if (*m != 0 && *m != 1) throw ParseError("matched flag must be 0 or 1", lineno);
    pairs.push_back({static_cast<std::size_t>(*a), static_cast<std::size_t>(*b), *m == 1});
  });
  if (pairs.empty()) throw ParseError("pair file has no pairs");
  return pairs;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename to '" + path.string() + "' failed: " + ec.message());
}

}  // namespace metricforge
