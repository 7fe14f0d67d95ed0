#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace radonlab {

struct LinearFit {
  double intercept = 0, slope = 0, r2 = 0;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "fit: need at least two points of equal-length data");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0, "fit: abscissae are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - f.intercept - f.slope * x[i];
    ssr += e * e;
  }
  f.r2 = syy == 0 ? 1.0 : std::clamp(1.0 - ssr / syy, 0.0, 1.0);
  return f;
}

enum class FitModel { PowerLaw, LogGrowth };

struct FitResult {
  double slope = 0, intercept = 0, r2 = 0;
  FitModel model = FitModel::PowerLaw;

  // power law: y = e^intercept x^slope; log growth: y = intercept + slope log x
  double predict(double x) const {
    return model == FitModel::PowerLaw ? std::exp(intercept) * std::pow(x, slope) : intercept + slope * std::log(x);
  }
  nlohmann::json to_json() const {
    return {{"model", model == FitModel::PowerLaw ? "power_law" : "log_growth"}, {"slope", slope}, {"intercept", intercept}, {"r2", r2}};
  }
};

inline FitResult fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() >= 3, "fit_power_law: need at least 3 points");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0 && y[i] > 0, "fit_power_law: data must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  auto f = least_squares(lx, ly);
  return {f.slope, f.intercept, f.r2, FitModel::PowerLaw};
}

inline FitResult fit_log_growth(const std::vector<double>& N, const std::vector<double>& y) {
  require(N.size() >= 3, "fit_log_growth: need at least 3 points");
  std::vector<double> lx;
  for (double v : N) {
    require(v >= 2, "fit_log_growth: need N >= 2");
    lx.push_back(std::log(v));
  }
  auto f = least_squares(lx, y);
  return {f.slope, f.intercept, f.r2, FitModel::LogGrowth};
}

}  // namespace radonlab
