#pragma once

#include <vector>

namespace msq {

struct FitResult {
  double slope = 0, intercept = 0, stderr_slope = 0;
  std::size_t n = 0;
};

// Least squares line through (log x_i, log y_i); inputs must be positive.
FitResult loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

// Least squares line through (x_i, y_i).
FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace msq
