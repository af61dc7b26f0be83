#include "limitnet/bd_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "limitnet/errors.hpp"

namespace limitnet {

namespace {

double integrate_cubic(const std::vector<double>& c, double a, double b) {
  auto antiderivative = [&](double x) {
    return x * (c[0] + x * (c[1] / 2.0 + x * (c[2] / 3.0 + x * (c[3] / 4.0))));
  };
  return antiderivative(b) - antiderivative(a);
}

struct Axis {
  std::vector<double> x, y;
};

// Mean difference test - reference of the fitted y(x) over the shared x range.
double mean_fitted_difference(const Axis& ref, const Axis& test) {
  const double lo = std::max(*std::min_element(ref.x.begin(), ref.x.end()), *std::min_element(test.x.begin(), test.x.end()));
  const double hi = std::min(*std::max_element(ref.x.begin(), ref.x.end()), *std::max_element(test.x.begin(), test.x.end()));
  if (!(hi > lo)) throw Error("curves do not overlap");
  const auto pr = fit_cubic(ref.x, ref.y);
  const auto pt = fit_cubic(test.x, test.y);
  return (integrate_cubic(pt, lo, hi) - integrate_cubic(pr, lo, hi)) / (hi - lo);
}

}  // namespace

RQCurve::RQCurve(std::vector<RatePoint> points) : points_(std::move(points)) {
  if (points_.size() < 4) throw Error("a rate-quality curve needs at least 4 points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].rate > 0.0) || !std::isfinite(points_[i].rate) || !std::isfinite(points_[i].quality)) {
      throw Error("rates must be positive and values finite");
    }
    if (i > 0 && !(points_[i].rate > points_[i - 1].rate)) throw Error("rates must be strictly increasing");
    if (i > 0 && points_[i].quality < points_[i - 1].quality) non_monotone_ = true;
  }
}

std::vector<double> fit_cubic(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 4) throw Error("cubic fit needs at least 4 points");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 4);
  Eigen::VectorXd b(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = 1.0;
    a(r, 1) = x[i];
    a(r, 2) = x[i] * x[i];
    a(r, 3) = x[i] * x[i] * x[i];
    b(r) = y[i];
  }
  const Eigen::Vector4d c = a.colPivHouseholderQr().solve(b);
  return {c(0), c(1), c(2), c(3)};
}

double bd_quality(const RQCurve& reference, const RQCurve& test) {
  Axis ref, tst;
  for (const auto& p : reference.points()) {
    ref.x.push_back(std::log10(p.rate));
    ref.y.push_back(p.quality);
  }
  for (const auto& p : test.points()) {
    tst.x.push_back(std::log10(p.rate));
    tst.y.push_back(p.quality);
  }
  return mean_fitted_difference(ref, tst);
}

double bd_rate(const RQCurve& reference, const RQCurve& test) {
  Axis ref, tst;
  for (const auto& p : reference.points()) {
    ref.x.push_back(p.quality);
    ref.y.push_back(std::log10(p.rate));
  }
  for (const auto& p : test.points()) {
    tst.x.push_back(p.quality);
    tst.y.push_back(std::log10(p.rate));
  }
  const double delta = mean_fitted_difference(ref, tst);
  return 100.0 * (std::pow(10.0, delta) - 1.0);
}

RQCurve read_curve_csv(std::istream& in) {
  std::vector<RatePoint> points;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    RatePoint p;
    if (!(fields >> p.rate >> p.quality)) {
      if (first) {
        first = false;
        continue;
      }
      throw Error("malformed curve line: " + line);
    }
    first = false;
    points.push_back(p);
  }
  return RQCurve(std::move(points));
}

RQCurve read_curve_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_curve_csv(in);
}

}  // namespace limitnet
