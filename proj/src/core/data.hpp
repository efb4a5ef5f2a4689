#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace dkgp {

// One stock's daily log-return history, dates ISO-8601 and strictly
// increasing.
struct ReturnSeries {
  std::string stock_id;
  std::vector<std::string> dates;
  Eigen::VectorXd returns;
};

// How the per-stock normalizer picks its divisor. `maxabs` (default) divides
// the de-meaned return by the max absolute deviation seen in training, so
// training values land in [-1, 1] and the map inverts exactly. `literal`
// divides the de-meaned return by the raw training maximum; `minmax` is the
// textbook (r - min)/(max - min).
enum class NormKind { maxabs, literal, minmax };

NormKind norm_kind_from_name(const std::string& name);
std::string norm_kind_name(NormKind kind);

struct NormStats {
  NormKind kind = NormKind::maxabs;
  double offset = 0.0;  // subtracted first: training mean (min for minmax)
  double scale = 1.0;   // positive divisor

  double apply(double r) const { return (r - offset) / scale; }
  double invert(double x) const { return x * scale + offset; }
};

// Fit on training rows only; anything later in the series must not touch it.
NormStats fit_normalizer(const Eigen::VectorXd& train_returns,
                         NormKind kind = NormKind::maxabs);

// One supervised example: `window` rows are the window_len most recent days
// before the label day, oldest first; column 0 the normalized return, column
// 1 its ternary sign. The label is the normalized return on `date`.
struct Sample {
  Eigen::MatrixXd window;
  double label = 0.0;
  std::string date;
};

std::vector<Sample> build_samples(const ReturnSeries& series,
                                  const NormStats& stats, int window_len = 20);

struct DatasetSplit {
  std::vector<Sample> train;
  std::vector<Sample> validation;
  std::vector<Sample> test;
};

// Chronological partition: last `test_len` samples are the test set; the
// remainder splits train:validation at floor(train_frac * m).
DatasetSplit split_dataset(const std::vector<Sample>& samples,
                           int test_len = 300, double train_frac = 0.7);

// ln(last) - ln(first); both prices must be positive.
double log_return(double first_price, double last_price);

// Parse a CSV with header `date,stock_id,first_price,last_price` (returns
// computed via log_return) or `date,stock_id,log_return`. Rows are grouped by
// stock and sorted by date; stocks are returned sorted by id. Malformed rows
// and duplicate (date, stock) pairs raise ParseError with the line number.
std::vector<ReturnSeries> ingest_csv(const std::string& path);

// Serialize series to the `date,stock_id,log_return` schema, stocks in the
// given order, one row per day. Round-trips through ingest_csv.
std::string returns_csv(const std::vector<ReturnSeries>& series);

}  // namespace dkgp
