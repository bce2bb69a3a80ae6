#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "driftcast/mat.hpp"

namespace driftcast {

struct MetricsReport {
  double rmse = 0.0;
  double mae = 0.0;
  double mape = 0.0;              // percent, terms with |y| < threshold excluded
  std::size_t mape_excluded = 0;  // how many terms the threshold dropped
  std::size_t count = 0;          // residuals included in RMSE/MAE
};

inline constexpr double kMapeThreshold = 1e-6;

MetricsReport evaluate(const std::vector<double>& predictions, const std::vector<double>& truth);
MetricsReport evaluate(const Mat& predictions, const Mat& truth);

struct MetricsRow {
  std::string object_id;
  std::string model;
  int t_h = 1;
  MetricsReport report;
};

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

}  // namespace driftcast
