#pragma once

// The simulate / estimate / localize / evaluate workflows behind the CLI.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "breathfind/io.hpp"
#include "breathfind/rate.hpp"
#include "breathfind/tomography.hpp"

namespace breathfind::commands {

namespace fs = std::filesystem;

/// Empty lists mean "keep everything".
struct LinkFilter {
  std::vector<NodeId> nodes;
  std::vector<int> channels;
};

/// Keeps links whose endpoints are both in `nodes` and whose channel is in
/// `channels`. Throws DataError when nothing is left.
std::vector<RssSeries> filter_links(std::span<const RssSeries> series, const LinkFilter& filter);

/// Parses "0,2,4,6".
std::vector<int> parse_id_list(std::string_view text);

struct SimulateOptions {
  fs::path scenario;  // empty: all defaults
  fs::path trace_out;
  std::optional<std::uint64_t> seed;
};

/// Writes the trace with its nodes, meta and truth companions.
Scenario simulate(const SimulateOptions& options);

/// Rate rows with their centred median, times = window_end * T.
std::vector<io::RateRow> rate_rows(std::span<const RateEstimate> estimates, double sample_period,
                                   double median_span_s);

struct EstimateOptions {
  fs::path trace;
  std::optional<fs::path> config;
  std::optional<Method> method;
  LinkFilter filter;
  std::optional<fs::path> out;
};

std::vector<io::RateRow> estimate(const EstimateOptions& options);

struct LocalizeOptions {
  fs::path trace;
  std::optional<fs::path> config;
  LinkFilter filter;
  std::optional<fs::path> out;
  std::optional<fs::path> image_dir;
};

struct LocalizeResult {
  std::vector<io::LocationRow> rows;
  Eigen::Index pixels = 0;
  Eigen::Index grid_nx = 0;
  Eigen::Index grid_ny = 0;
  double model_build_seconds = 0;
  double window_seconds_total = 0;
};

/// Builds the imaging model once, then images every window. When `images`
/// is non-null each window's image is appended to it.
LocalizeResult localize_series(std::span<const RssSeries> series, std::span<const NodeGeometry> nodes,
                               const EstimatorConfig& estimator, const ImagingParams& imaging,
                               Method method, std::vector<BreathingImage>* images = nullptr);

LocalizeResult localize(const LocalizeOptions& options);

struct EvaluateOptions {
  std::optional<fs::path> rates;
  std::optional<fs::path> locations;
  fs::path truth;
  std::optional<fs::path> out;  // metrics CSV
  double median_span_s = 90.0;
};

struct EvaluationReport {
  std::optional<RateMetrics> rates;
  std::optional<double> mean_location_error_m;
  std::optional<double> rms_location_error_m;
  std::optional<Eigen::Vector2d> mean_location;
  std::size_t degenerate_images = 0;

  std::string text() const;
  std::string csv() const;
};

EvaluationReport evaluate_rows(std::span<const io::RateRow> rates,
                               std::span<const io::LocationRow> locations, const GroundTruth& truth,
                               double median_span_s);

EvaluationReport evaluate(const EvaluateOptions& options);

}  // namespace breathfind::commands
