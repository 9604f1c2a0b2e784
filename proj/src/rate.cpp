#include "breathfind/rate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace breathfind {

std::string_view to_string(Method method) {
  return method == Method::basic ? "basic" : "breakpoint";
}

Method parse_method(std::string_view text) {
  if (text == "basic") return Method::basic;
  if (text == "breakpoint") return Method::breakpoint;
  throw InvalidConfiguration("unknown method '" + std::string(text) + "'");
}

void EstimatorConfig::validate() const {
  if (!(sample_period > 0)) throw InvalidConfiguration("sample period must be positive");
  if (window_length < 2) throw InvalidConfiguration("window length must be at least 2");
  grid.validate(sample_period);
  ttest.validate();
  if (!(hop_seconds > 0)) throw InvalidConfiguration("window hop must be positive");
  if (!(median_span_seconds >= 0)) throw InvalidConfiguration("median span must be non-negative");
}

Eigen::MatrixXd remove_mean(const RssFrame& frame, Method method, const TTestParams& ttest,
                            BreakpointSet* breakpoints_out) {
  std::vector<Eigen::Index> cuts{0};
  if (method == Method::breakpoint) {
    BreakpointSet bps = detect_breakpoints(frame, ttest);
    cuts = bps.segment_cuts();
    if (breakpoints_out) *breakpoints_out = std::move(bps);
  }
  Eigen::MatrixXd y(frame.link_count(), frame.length());
  for (Eigen::Index l = 0; l < frame.link_count(); ++l) {
    y.row(l) = remove_segment_means(frame.samples.row(l), cuts).transpose();
  }
  return y;
}

RateEstimate estimate_rate(const RssFrame& frame, const EstimatorConfig& config, Method method) {
  config.validate();
  if (frame.link_count() == 0 || frame.length() == 0) throw EmptyFrameError("empty frame");

  BreakpointSet bps;
  const Eigen::MatrixXd y = remove_mean(frame, method, config.ttest, &bps);

  RateEstimate est;
  est.method = method;
  est.window_end = frame.end();
  est.links = frame.links;
  if (method == Method::breakpoint) {
    est.breakpoints = bps.interior;
    est.motion_detected = bps.motion_detected();
  }

  const SpectralBasis<double> basis(config.grid.frequencies(), config.sample_period, frame.start,
                                    frame.length());

  if ((y.array() == 0.0).all()) {
    est.degenerate = true;
    est.f_hat = config.grid.f_min;
    est.motion_detected = method == Method::breakpoint;
    est.link_psd = Eigen::VectorXd::Zero(frame.link_count());
    return est;
  }

  const Eigen::MatrixXd per_link = link_psd(y, basis);
  const Eigen::VectorXd spectrum = per_link.colwise().sum().transpose();

  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < spectrum.size(); ++j) {
    if (spectrum[j] > spectrum[best]) best = j;
  }
  est.f_hat = basis.frequencies[best];
  est.link_psd = per_link.col(best);
  return est;
}

std::vector<SampleIndex> window_ends(SampleIndex sample_count, const EstimatorConfig& config) {
  config.validate();
  std::vector<SampleIndex> ends;
  const double hop_samples = config.hop_seconds / config.sample_period;
  for (SampleIndex k = 0;; ++k) {
    const SampleIndex end = config.window_length - 1 +
                            static_cast<SampleIndex>(std::llround(static_cast<double>(k) * hop_samples));
    if (end >= sample_count) break;
    if (!ends.empty() && end == ends.back()) continue;
    ends.push_back(end);
  }
  return ends;
}

std::vector<RateEstimate> estimate_sliding(std::span<const RssSeries> series,
                                           const EstimatorConfig& config, Method method) {
  SampleIndex sample_count = 0;
  for (const auto& s : series) sample_count = std::max(sample_count, s.size());

  std::vector<RateEstimate> estimates;
  for (SampleIndex end : window_ends(sample_count, config)) {
    RssFrame frame;
    try {
      frame = extract_frame(series, end, config.window_length);
    } catch (const EmptyFrameError&) {
      continue;
    }
    estimates.push_back(estimate_rate(frame, config, method));
  }
  return estimates;
}

namespace {

double median_of(std::vector<double>& values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

std::vector<double> median_smooth(std::span<const double> times, std::span<const double> values,
                                  double span_seconds) {
  if (times.size() != values.size()) throw DimensionMismatch("times and values differ in length");
  const double half = 0.5 * span_seconds;
  // Small slack so that neighbours exactly span/2 away survive rounding of times.
  const double slack = 1e-9 * std::max(1.0, half);
  std::vector<double> smoothed(values.size());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < values.size(); ++i) {
    scratch.clear();
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (std::abs(times[j] - times[i]) <= half + slack) scratch.push_back(values[j]);
    }
    smoothed[i] = median_of(scratch);
  }
  return smoothed;
}

RateMetrics evaluate_rates(std::span<const RateSample> samples, std::optional<double> truth_bpm,
                           double median_span_s) {
  if (samples.empty()) throw DataError("no rate estimates to evaluate");

  RateMetrics m;
  m.count = samples.size();

  std::vector<double> times, bpm;
  times.reserve(samples.size());
  bpm.reserve(samples.size());
  for (const auto& s : samples) {
    times.push_back(s.time_s);
    bpm.push_back(s.bpm);
    if (s.bpm < kLowRateBpm) {
      ++m.low_count;
      ++(s.motion ? m.low_with_motion : m.low_without_motion);
    }
  }

  const auto median = median_smooth(times, bpm, median_span_s);
  double sq = 0;
  for (std::size_t i = 0; i < bpm.size(); ++i) sq += (bpm[i] - median[i]) * (bpm[i] - median[i]);
  m.rms_median_bpm = std::sqrt(sq / static_cast<double>(bpm.size()));

  if (truth_bpm) {
    std::size_t acceptable = 0;
    double abs_err = 0;
    for (double b : bpm) {
      const double err = std::abs(b - *truth_bpm);
      // Slack keeps values printed at the 3.00 boundary on the acceptable side.
      if (err <= kAcceptableErrorBpm + 1e-9) ++acceptable;
      abs_err += err;
    }
    m.fraction_acceptable = static_cast<double>(acceptable) / static_cast<double>(bpm.size());
    m.mean_abs_error_bpm = abs_err / static_cast<double>(bpm.size());
  }
  return m;
}

}  // namespace breathfind
