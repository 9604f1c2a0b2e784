#pragma once

// Breathing-rate estimation over sliding windows, median smoothing and the
// rate evaluation metrics.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "breathfind/breakpoints.hpp"
#include "breathfind/core.hpp"
#include "breathfind/spectral.hpp"

namespace breathfind {

enum class Method { basic, breakpoint };

std::string_view to_string(Method method);
/// Accepts "basic" or "breakpoint"; throws InvalidConfiguration otherwise.
Method parse_method(std::string_view text);

inline constexpr double kSecondsPerMinute = 60.0;
inline double hz_to_bpm(double hz) { return hz * kSecondsPerMinute; }
inline double bpm_to_hz(double bpm) { return bpm / kSecondsPerMinute; }

struct EstimatorConfig {
  double sample_period = 0.428;     // T, seconds
  Eigen::Index window_length = 70;  // N, samples
  FrequencyGrid grid{};             // 0.1..0.4 Hz in 0.002 Hz steps
  TTestParams ttest{};
  double hop_seconds = 5.0;
  double median_span_seconds = 90.0;

  void validate() const;
};

struct RateEstimate {
  double f_hat = 0;  // Hz
  Method method = Method::basic;
  bool motion_detected = false;
  /// Set when every mean-removed sample is zero and no spectrum exists.
  bool degenerate = false;
  SampleIndex window_end = 0;
  std::vector<LinkKey> links;
  /// PSD of each link at f_hat, aligned with `links`.
  Eigen::VectorXd link_psd;
  std::vector<SampleIndex> breakpoints;  // interior only

  double bpm() const { return hz_to_bpm(f_hat); }
};

/// Mean-removed samples for every link of the frame.
Eigen::MatrixXd remove_mean(const RssFrame& frame, Method method, const TTestParams& ttest,
                            BreakpointSet* breakpoints_out = nullptr);

/// Grid frequency maximising the link-summed PSD; ties go to the lowest
/// frequency.
RateEstimate estimate_rate(const RssFrame& frame, const EstimatorConfig& config, Method method);

/// End indices i_k = N-1 + round(k * hop / T) that fit in `sample_count`.
std::vector<SampleIndex> window_ends(SampleIndex sample_count, const EstimatorConfig& config);

/// One estimate per window end; windows without any usable link are skipped.
std::vector<RateEstimate> estimate_sliding(std::span<const RssSeries> series,
                                           const EstimatorConfig& config, Method method);

/// Median of the values whose time lies within +-span/2 of each entry's own
/// time. Even-sized neighbourhoods average the two middle values.
std::vector<double> median_smooth(std::span<const double> times, std::span<const double> values,
                                  double span_seconds);

inline constexpr double kAcceptableErrorBpm = 3.0;
inline constexpr double kLowRateBpm = 9.0;

struct RateSample {
  double time_s = 0;
  double bpm = 0;
  bool motion = false;
};

struct RateMetrics {
  std::size_t count = 0;
  std::optional<double> fraction_acceptable;
  std::optional<double> mean_abs_error_bpm;
  double rms_median_bpm = 0;
  std::size_t low_count = 0;
  std::size_t low_with_motion = 0;
  std::size_t low_without_motion = 0;
};

/// Acceptable means |estimate - truth| <= 3 bpm. RMS-median is the RMS of
/// estimate minus its centred median over `median_span_s`. Low estimates
/// (< 9 bpm) are split by the motion flag. Throws DataError when empty.
RateMetrics evaluate_rates(std::span<const RateSample> samples, std::optional<double> truth_bpm,
                           double median_span_s = 90.0);

}  // namespace breathfind
