#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "driftcast/metrics.hpp"

using namespace driftcast;

TEST_CASE("rmse, mae and mape on a hand-worked example") {
  std::vector<double> pred = {2.0, 4.0, 5.0};
  std::vector<double> truth = {1.0, 4.0, 7.0};
  auto r = evaluate(pred, truth);
  // residuals 1, 0, -2 -> rmse sqrt(5/3), mae 1, mape mean(100, 0, 200/7)
  CHECK(r.rmse == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));
  CHECK(r.mae == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.mape == doctest::Approx((100.0 + 0.0 + 100.0 * 2.0 / 7.0) / 3.0).epsilon(1e-12));
  CHECK(r.count == 3);
  CHECK(r.mape_excluded == 0);
}

TEST_CASE("mape excludes near-zero truth terms but rmse keeps them") {
  std::vector<double> pred = {1.0, 3.0};
  std::vector<double> truth = {0.0, 2.0};
  auto r = evaluate(pred, truth);
  CHECK(r.mape_excluded == 1);
  CHECK(r.mape == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(r.count == 2);
  CHECK(r.rmse == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("perfect prediction gives zero errors") {
  std::vector<double> v = {1.0, -2.0, 3.5};
  auto r = evaluate(v, v);
  CHECK(r.rmse == 0.0);
  CHECK(r.mae == 0.0);
  CHECK(r.mape == 0.0);
}

TEST_CASE("matrix overload flattens both coordinates") {
  Mat pred(2, 2), truth(2, 2);
  pred.at(0, 0) = 1.0;
  pred.at(0, 1) = 2.0;
  pred.at(1, 0) = 3.0;
  pred.at(1, 1) = 4.0;
  truth = pred;
  truth.at(1, 1) = 6.0;
  auto r = evaluate(pred, truth);
  CHECK(r.count == 4);
  CHECK(r.mae == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.rmse == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empty or mismatched inputs are rejected") {
  std::vector<double> a = {1.0}, b = {1.0, 2.0}, e;
  CHECK_THROWS(evaluate(a, b));
  CHECK_THROWS(evaluate(e, e));
}

TEST_CASE("metrics CSV round-trip is byte-stable") {
  std::vector<MetricsRow> rows(2);
  rows[0].object_id = "buoy";
  rows[0].model = "mm-lstm";
  rows[0].t_h = 5;
  rows[0].report.rmse = 1.23456789012345;
  rows[0].report.mae = 0.9;
  rows[0].report.mape = 12.5;
  rows[1].object_id = "crate";
  rows[1].model = "curvefit";
  rows[1].t_h = 1;
  rows[1].report.rmse = 42.0;
  rows[1].report.mae = 40.0;
  rows[1].report.mape = 99.0;

  auto dir = std::filesystem::temp_directory_path();
  auto p1 = (dir / "driftcast_metrics_a.csv").string();
  auto p2 = (dir / "driftcast_metrics_b.csv").string();
  write_metrics_csv(rows, p1);
  auto loaded = read_metrics_csv(p1);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].object_id == "buoy");
  CHECK(loaded[0].model == "mm-lstm");
  CHECK(loaded[0].t_h == 5);
  CHECK(loaded[0].report.rmse == rows[0].report.rmse);
  CHECK(loaded[1].report.mape == rows[1].report.mape);

  write_metrics_csv(loaded, p2);
  std::ifstream f1(p1), f2(p2);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("metrics CSV header matches the declared schema") {
  auto path = (std::filesystem::temp_directory_path() / "driftcast_metrics_h.csv").string();
  write_metrics_csv({}, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "object,model,t_h,RMSE,MAE,MAPE");
  std::filesystem::remove(path);
}
