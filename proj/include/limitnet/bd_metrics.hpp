#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace limitnet {

struct RatePoint {
  double rate = 0.0;  // bytes, > 0
  double quality = 0.0;
};

// At least four points with strictly increasing rates.
class RQCurve {
 public:
  // Throws Error on fewer than 4 points, non-positive or non-increasing rates.
  explicit RQCurve(std::vector<RatePoint> points);

  const std::vector<RatePoint>& points() const noexcept { return points_; }
  // True when quality decreases somewhere along the curve (fit proceeds anyway).
  bool non_monotone() const noexcept { return non_monotone_; }

 private:
  std::vector<RatePoint> points_;
  bool non_monotone_ = false;
};

// Least-squares cubic; coefficients c0 + c1 x + c2 x^2 + c3 x^3.
std::vector<double> fit_cubic(const std::vector<double>& x, const std::vector<double>& y);

// Mean quality difference (test - reference) over the common log10-rate interval.
double bd_quality(const RQCurve& reference, const RQCurve& test);

// Percent rate difference at equal quality; negative means the test curve saves rate.
double bd_rate(const RQCurve& reference, const RQCurve& test);

// "rate,quality" per line; a non-numeric first line is treated as a header.
RQCurve read_curve_csv(std::istream& in);
RQCurve read_curve_csv_file(const std::string& path);

}  // namespace limitnet
