#include "breathfind/spectral.hpp"

#include <string>

namespace breathfind {

void FrequencyGrid::validate(double sample_period) const {
  if (!(sample_period > 0)) throw InvalidConfiguration("sample period must be positive");
  if (!(f_min > 0)) throw InvalidConfiguration("f_min must be positive");
  if (!(f_max > f_min)) throw InvalidConfiguration("f_max must exceed f_min");
  if (!(f_max < 0.5 / sample_period)) {
    throw InvalidConfiguration("f_max must be below the Nyquist frequency " +
                               std::to_string(0.5 / sample_period) + " Hz");
  }
  if (!(step > 0)) throw InvalidConfiguration("frequency step must be positive");
}

Eigen::VectorXd FrequencyGrid::frequencies() const {
  const double span = f_max - f_min;
  auto intervals = static_cast<Eigen::Index>(std::floor(span / step + 1e-9));
  const bool exact = std::abs(static_cast<double>(intervals) * step - span) <= 1e-9 * span;
  const Eigen::Index count = intervals + (exact ? 1 : 2);
  Eigen::VectorXd f(count);
  for (Eigen::Index k = 0; k < count - 1; ++k) f[k] = f_min + static_cast<double>(k) * step;
  f[count - 1] = f_max;
  return f;
}

}  // namespace breathfind
