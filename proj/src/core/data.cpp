#include "core/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "core/errors.hpp"

namespace dkgp {

namespace {

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

double parse_double(const std::string& s, int line_no) {
  double value = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line_no) +
                     ": bad numeric field '" + s + "'");
  }
  return value;
}

bool looks_like_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

}  // namespace

NormKind norm_kind_from_name(const std::string& name) {
  if (name == "maxabs") return NormKind::maxabs;
  if (name == "literal") return NormKind::literal;
  if (name == "minmax") return NormKind::minmax;
  throw InputError("unknown normalizer '" + name + "'");
}

std::string norm_kind_name(NormKind kind) {
  switch (kind) {
    case NormKind::maxabs: return "maxabs";
    case NormKind::literal: return "literal";
    case NormKind::minmax: return "minmax";
  }
  return "?";
}

NormStats fit_normalizer(const Eigen::VectorXd& train_returns, NormKind kind) {
  if (train_returns.size() < 2) {
    throw InputError("fit_normalizer: need at least 2 training returns");
  }
  NormStats stats;
  stats.kind = kind;
  const double mean = train_returns.mean();
  switch (kind) {
    case NormKind::maxabs:
      stats.offset = mean;
      stats.scale = (train_returns.array() - mean).abs().maxCoeff();
      break;
    case NormKind::literal:
      stats.offset = mean;
      stats.scale = train_returns.maxCoeff();
      break;
    case NormKind::minmax:
      stats.offset = train_returns.minCoeff();
      stats.scale = train_returns.maxCoeff() - train_returns.minCoeff();
      break;
  }
  if (!(stats.scale > 0.0)) {
    throw InputError("fit_normalizer: degenerate scale");
  }
  return stats;
}

std::vector<Sample> build_samples(const ReturnSeries& series,
                                  const NormStats& stats, int window_len) {
  if (window_len < 1) throw InputError("build_samples: window_len must be >= 1");
  const Eigen::Index n = series.returns.size();
  if (n < window_len + 1) {
    throw InputError("build_samples: series shorter than window_len + 1");
  }
  if (static_cast<Eigen::Index>(series.dates.size()) != n) {
    throw InputError("build_samples: dates/returns length mismatch");
  }

  Eigen::VectorXd norm(n);
  for (Eigen::Index i = 0; i < n; ++i) norm[i] = stats.apply(series.returns[i]);

  std::vector<Sample> samples;
  samples.reserve(n - window_len);
  for (Eigen::Index t = window_len; t < n; ++t) {
    Sample s;
    s.window.resize(window_len, 2);
    for (int k = 0; k < window_len; ++k) {
      const double r = norm[t - window_len + k];
      s.window(k, 0) = r;
      s.window(k, 1) = sign_of(r);
    }
    s.label = norm[t];
    s.date = series.dates[t];
    samples.push_back(std::move(s));
  }
  return samples;
}

DatasetSplit split_dataset(const std::vector<Sample>& samples, int test_len,
                           double train_frac) {
  if (test_len < 1) throw InputError("split_dataset: test_len must be >= 1");
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw InputError("split_dataset: train_frac must lie in (0,1)");
  }
  const int n = static_cast<int>(samples.size());
  if (n <= test_len + 10) {
    throw InputError("split_dataset: need more than test_len + 10 samples");
  }
  const int m = n - test_len;
  // Nudge before flooring so the exact rational (e.g. 7/10 of 700) is not
  // lost to the binary representation of train_frac.
  const int n_train = static_cast<int>(std::floor(train_frac * m + 1e-9));

  DatasetSplit split;
  split.train.assign(samples.begin(), samples.begin() + n_train);
  split.validation.assign(samples.begin() + n_train, samples.begin() + m);
  split.test.assign(samples.begin() + m, samples.end());
  return split;
}

double log_return(double first_price, double last_price) {
  if (!(first_price > 0.0) || !(last_price > 0.0)) {
    throw InputError("log_return: prices must be positive");
  }
  return std::log(last_price) - std::log(first_price);
}

std::vector<ReturnSeries> ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::string line;
  int line_no = 0;
  bool have_header = false;
  bool price_schema = false;

  struct Row {
    std::string date;
    double value;
  };
  std::map<std::string, std::vector<Row>> by_stock;
  std::set<std::pair<std::string, std::string>> seen;  // (stock, date)

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    if (!have_header) {
      const std::string header = trim(line);
      if (header == "date,stock_id,first_price,last_price") {
        price_schema = true;
      } else if (header == "date,stock_id,log_return") {
        price_schema = false;
      } else {
        throw ParseError("line 1: unrecognized header '" + header + "'");
      }
      have_header = true;
      continue;
    }

    const std::vector<std::string> f = split_csv_line(line);
    const size_t want = price_schema ? 4u : 3u;
    if (f.size() != want) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(want) + " fields, got " +
                       std::to_string(f.size()));
    }
    if (!looks_like_iso_date(f[0])) {
      throw ParseError("line " + std::to_string(line_no) + ": bad date '" +
                       f[0] + "'");
    }
    if (f[1].empty()) {
      throw ParseError("line " + std::to_string(line_no) + ": empty stock_id");
    }

    double r;
    if (price_schema) {
      const double first = parse_double(f[2], line_no);
      const double last = parse_double(f[3], line_no);
      if (!(first > 0.0) || !(last > 0.0)) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": non-positive price");
      }
      r = log_return(first, last);
    } else {
      r = parse_double(f[2], line_no);
    }

    if (!seen.insert({f[1], f[0]}).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate (" +
                       f[0] + ", " + f[1] + ")");
    }
    by_stock[f[1]].push_back({f[0], r});
  }

  std::vector<ReturnSeries> out;
  out.reserve(by_stock.size());
  for (auto& [stock_id, rows] : by_stock) {
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.date < b.date; });
    ReturnSeries s;
    s.stock_id = stock_id;
    s.dates.reserve(rows.size());
    s.returns.resize(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
      s.dates.push_back(rows[i].date);
      s.returns[static_cast<Eigen::Index>(i)] = rows[i].value;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string returns_csv(const std::vector<ReturnSeries>& series) {
  std::string csv = "date,stock_id,log_return\n";
  char buf[48];
  for (const auto& s : series) {
    for (size_t i = 0; i < s.dates.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.10g",
                    s.returns[static_cast<Eigen::Index>(i)]);
      csv += s.dates[i] + "," + s.stock_id + "," + buf + "\n";
    }
  }
  return csv;
}

}  // namespace dkgp
