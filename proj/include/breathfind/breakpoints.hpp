#pragma once

// Group t-test change detection and piecewise-constant mean removal.
//
// At window position n the "before" group is r[n-Q..n-1] and the "after"
// group is r[n..n+Q-1], so a detected index is the first sample of the new
// level. Scores are computed on raw RSS, not on mean-removed samples.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "breathfind/core.hpp"
#include "breathfind/spectral.hpp"

namespace breathfind {

struct TTestParams {
  int group_size = 14;   // Q, samples per group
  double epsilon = 0.5;  // dB floor on the denominator
  double gamma = 0.8;    // RMS t-score threshold

  void validate() const;
};

struct BreakpointSet {
  SampleIndex start = 0;  // always a breakpoint
  SampleIndex end = 0;    // always a breakpoint (inclusive window end)
  std::vector<SampleIndex> interior;
  /// RMS t-score per window position; nullopt where it is not computable.
  std::vector<std::optional<double>> rms_trace;
  bool too_short = false;

  bool motion_detected() const { return !interior.empty(); }

  /// Window-relative segment starts: 0 followed by each interior breakpoint.
  /// The last segment runs through the window end inclusively.
  std::vector<Eigen::Index> segment_cuts() const;
};

/// tau[n] = (mean_before - mean_after) / max(eps, sqrt((var_before + var_after) / Q))
/// with unbiased (Q-1) sample variances. Returns nullopt when either group
/// would leave the slice.
template <typename Derived>
std::optional<double> t_score(const Eigen::MatrixBase<Derived>& raw, Eigen::Index n,
                              const TTestParams& params) {
  const Eigen::Index q = params.group_size;
  if (n < q || n + q > raw.size()) return std::nullopt;
  const Eigen::VectorXd before = raw.derived().reshaped().segment(n - q, q).template cast<double>();
  const Eigen::VectorXd after = raw.derived().reshaped().segment(n, q).template cast<double>();
  const double mean_before = before.mean();
  const double mean_after = after.mean();
  const double var_before = (before.array() - mean_before).square().sum() / static_cast<double>(q - 1);
  const double var_after = (after.array() - mean_after).square().sum() / static_cast<double>(q - 1);
  const double spread = std::sqrt((var_before + var_after) / static_cast<double>(q));
  return (mean_before - mean_after) / std::max(params.epsilon, spread);
}

/// sqrt(mean(tau^2)) over the computable entries; nullopt if there are none.
std::optional<double> rms_t_score(std::span<const std::optional<double>> scores);

/// Marks every index whose RMS t-score across the frame's links reaches
/// gamma. Runs of adjacent breakpoints are kept. Frames shorter than 2Q
/// yield only the start/end breakpoints and set too_short.
BreakpointSet detect_breakpoints(const RssFrame& frame, const TTestParams& params);

template <typename Derived>
Eigen::VectorXd remove_mean_breakpoint(const Eigen::MatrixBase<Derived>& raw,
                                       const BreakpointSet& breakpoints) {
  if (static_cast<SampleIndex>(raw.size()) != breakpoints.end - breakpoints.start + 1) {
    throw DimensionMismatch("slice length does not match the breakpoint window");
  }
  const auto cuts = breakpoints.segment_cuts();
  return remove_segment_means(raw, cuts);
}

}  // namespace breathfind
