#pragma once

// Mean removal and direct evaluation of the discrete-frequency PSD
//
//   P_l(f) = | sum_{n=n0}^{n0+N-1} y_l[n] exp(-j 2 pi f T n) |^2
//
// at arbitrary (non-bin) frequencies. Sample indices n are absolute, so the
// complex transform carries the phase of the window position; the power
// does not depend on n0.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>

#include <Eigen/Core>

#include "breathfind/core.hpp"
#include "breathfind/error.hpp"

namespace breathfind {

/// Candidate frequencies f_min, f_min+step, ..., f_max (Hz). The last point is
/// f_max exactly even when the range is not a multiple of the step.
struct FrequencyGrid {
  double f_min = 0.1;
  double f_max = 0.4;
  double step = 0.002;

  /// Requires 0 < f_min < f_max < 1/(2T) and step > 0.
  void validate(double sample_period) const;
  Eigen::VectorXd frequencies() const;
};

template <typename Derived>
typename Derived::Scalar window_mean(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0) throw DataError("window_mean of an empty slice");
  return x.mean();
}

/// Subtracts a separate mean from each segment [cuts[k], cuts[k+1]) of x,
/// with an implicit final cut at x.size(). cuts must start at 0 and be
/// strictly increasing. Both mean-removal variants go through here so that a
/// single-segment piecewise removal is bit-identical to the basic one.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> remove_segment_means(
    const Eigen::MatrixBase<Derived>& x, std::span<const Eigen::Index> cuts) {
  using Vector = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;
  if (x.size() == 0) throw DataError("mean removal of an empty slice");
  if (cuts.empty() || cuts.front() != 0) throw InvalidConfiguration("segment cuts must start at 0");
  Vector y(x.size());
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const Eigen::Index begin = cuts[k];
    const Eigen::Index end = k + 1 < cuts.size() ? cuts[k + 1] : x.size();
    if (end <= begin || end > x.size()) throw InvalidConfiguration("segment cuts out of order");
    // Offsets from the first sample keep constant segments exactly zero.
    const auto flat = x.derived().reshaped();
    const Vector segment = flat.segment(begin, end - begin).array() - flat(begin);
    y.segment(begin, end - begin) = segment.array() - segment.mean();
  }
  return y;
}

/// y[n] = r[n] - mean(r) over the window.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> remove_mean_basic(
    const Eigen::MatrixBase<Derived>& x) {
  const Eigen::Index whole[] = {0};
  return remove_segment_means(x, whole);
}

/// 2 pi f T n reduced to [-pi, pi]. The whole cycles are removed before
/// scaling, with f T carried as an unevaluated sum, so large absolute indices
/// lose no accuracy.
template <typename Scalar>
Scalar reduced_phase(Scalar f, Scalar sample_period, SampleIndex n) {
  const Scalar hi = f * sample_period;
  const Scalar lo = std::fma(f, sample_period, -hi);
  const auto m = static_cast<Scalar>(n);
  const Scalar cycles = hi * m;
  const Scalar err = std::fma(hi, m, -cycles);
  const Scalar frac = (cycles - std::nearbyint(cycles)) + (err + lo * m);
  return Scalar(2) * std::numbers::pi_v<Scalar> * frac;
}

/// sum_n y[n] exp(-j 2 pi f T n), n = n0..n0+N-1.
template <typename Derived>
std::complex<typename Derived::Scalar> spectral_sum(const Eigen::MatrixBase<Derived>& y,
                                                    typename Derived::Scalar f,
                                                    typename Derived::Scalar sample_period,
                                                    SampleIndex n0) {
  using Scalar = typename Derived::Scalar;
  std::complex<Scalar> acc(0, 0);
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const Scalar phase = reduced_phase(f, sample_period, n0 + k);
    acc += y.derived().reshaped()(k) * std::complex<Scalar>(std::cos(phase), -std::sin(phase));
  }
  return acc;
}

template <typename Derived>
typename Derived::Scalar psd_at(const Eigen::MatrixBase<Derived>& y, typename Derived::Scalar f,
                                typename Derived::Scalar sample_period, SampleIndex n0) {
  if (!y.allFinite()) throw DataError("non-finite input to psd_at");
  if (f < 0) throw InvalidConfiguration("negative frequency");
  return std::norm(spectral_sum(y, f, sample_period, n0));
}

/// Precomputed cos/sin tables (N x F) for evaluating many links on one grid.
template <typename Scalar = double>
struct SpectralBasis {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector frequencies;
  Matrix cos_table;
  Matrix sin_table;

  SpectralBasis(const Vector& freqs, Scalar sample_period, SampleIndex n0, Eigen::Index length)
      : frequencies(freqs), cos_table(length, freqs.size()), sin_table(length, freqs.size()) {
    for (Eigen::Index j = 0; j < freqs.size(); ++j) {
      for (Eigen::Index k = 0; k < length; ++k) {
        const Scalar phase = reduced_phase(freqs[j], sample_period, n0 + k);
        cos_table(k, j) = std::cos(phase);
        sin_table(k, j) = -std::sin(phase);
      }
    }
  }

  Eigen::Index length() const { return cos_table.rows(); }
};

/// Per-link PSD on the basis grid: a links x F matrix. Rows of y are links.
template <typename Derived, typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> link_psd(
    const Eigen::MatrixBase<Derived>& y, const SpectralBasis<Scalar>& basis) {
  if (y.cols() != basis.length()) throw DimensionMismatch("window length differs from basis");
  const auto re = (y * basis.cos_table).eval();
  const auto im = (y * basis.sin_table).eval();
  return re.array().square() + im.array().square();
}

/// Sum over links of the per-link PSD at each grid frequency.
template <typename Derived, typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sum_psd(const Eigen::MatrixBase<Derived>& y,
                                                 const SpectralBasis<Scalar>& basis) {
  if (y.rows() == 0) throw DataError("sum_psd needs at least one link");
  return link_psd(y, basis).colwise().sum().transpose();
}

template <typename Derived>
Eigen::VectorXd sum_psd(const Eigen::MatrixBase<Derived>& y, const FrequencyGrid& grid,
                        double sample_period, SampleIndex n0) {
  grid.validate(sample_period);
  const SpectralBasis<double> basis(grid.frequencies(), sample_period, n0, y.cols());
  return sum_psd(y, basis);
}

}  // namespace breathfind
