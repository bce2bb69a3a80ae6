#include "driftcast/metrics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "driftcast/csv.hpp"

namespace driftcast {

MetricsReport evaluate(const std::vector<double>& predictions, const std::vector<double>& truth) {
  if (predictions.size() != truth.size())
    throw std::invalid_argument("prediction/truth size mismatch");
  if (predictions.empty()) throw std::invalid_argument("cannot evaluate empty predictions");

  MetricsReport r;
  double sq = 0.0, abs_sum = 0.0, pct_sum = 0.0;
  std::size_t pct_n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = predictions[i] - truth[i];
    sq += e * e;
    abs_sum += std::abs(e);
    if (std::abs(truth[i]) >= kMapeThreshold) {
      pct_sum += std::abs(e / truth[i]);
      ++pct_n;
    } else {
      ++r.mape_excluded;
    }
  }
  r.count = truth.size();
  r.rmse = std::sqrt(sq / static_cast<double>(r.count));
  r.mae = abs_sum / static_cast<double>(r.count);
  r.mape = pct_n > 0 ? 100.0 * pct_sum / static_cast<double>(pct_n) : 0.0;
  return r;
}

MetricsReport evaluate(const Mat& predictions, const Mat& truth) {
  if (predictions.rows != truth.rows || predictions.cols != truth.cols)
    throw std::invalid_argument("prediction/truth shape mismatch");
  return evaluate(predictions.v, truth.v);
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metrics csv: " + path);
  out << "object,model,t_h,RMSE,MAE,MAPE\n";
  for (const auto& row : rows) {
    out << row.object_id << ',' << row.model << ',' << row.t_h << ','
        << format_g17(row.report.rmse) << ',' << format_g17(row.report.mae) << ','
        << format_g17(row.report.mape) << "\n";
  }
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty metrics csv: " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 6) throw std::runtime_error("bad metrics row: " + line);
    MetricsRow row;
    row.object_id = cells[0];
    row.model = cells[1];
    row.t_h = static_cast<int>(parse_double(cells[2]));
    row.report.rmse = parse_double(cells[3]);
    row.report.mae = parse_double(cells[4]);
    row.report.mape = parse_double(cells[5]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace driftcast
