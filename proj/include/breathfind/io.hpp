#pragma once

// File formats.
//
//   trace      CSV  sample_index,tx,rx,channel,rss_db   (empty rss_db = missing)
//   nodes      CSV  node_id,x_m,y_m
//   meta       k=v  sample_period_s, nodes, channels
//   truth      k=v  rate_bpm, person_x_m, person_y_m, duration_s, motion_event_times_s
//   config     k=v  see RunConfig / scenario keys
//   rates      CSV  window_end_time_s,f_hat_bpm,motion_flag,median_bpm
//   locations  CSV  window_end_time_s,x_m,y_m,max_pixel_value,degenerate
//                   followed by one "mean" row
//   image      CSV  one row per grid row (y), one column per grid column (x)
//
// Companion files live next to the trace: run.csv -> run.nodes.csv,
// run.meta, run.truth.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "breathfind/core.hpp"
#include "breathfind/rate.hpp"
#include "breathfind/simulator.hpp"
#include "breathfind/tomography.hpp"

namespace breathfind::io {

namespace fs = std::filesystem;

/// Ordered key=value pairs; '#' starts a comment, blank lines are ignored.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text);
  static KeyValues load(const fs::path& path);

  bool contains(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> get(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::optional<double> get_double(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  /// Throws InvalidConfiguration naming the first key not in `allowed`.
  void require_known(std::initializer_list<std::string_view> allowed) const;

  std::string serialize() const;

 private:
  std::map<std::string, std::string> values_;
};

struct TraceMeta {
  double sample_period = 0;
  int nodes = 0;
  int channels = 0;
};

struct Trace {
  TraceMeta meta;
  std::vector<NodeGeometry> nodes;
  std::vector<RssSeries> series;  // channel-major link order
};

fs::path companion_path(const fs::path& trace, std::string_view suffix);

/// Writes `contents` to a temporary sibling and renames it into place.
void write_file_atomic(const fs::path& path, std::string_view contents);
std::string read_file(const fs::path& path);

std::string format_trace(std::span<const RssSeries> series);
/// Throws DataError on malformed rows, decreasing sample indices or
/// duplicate (sample_index, tx, rx, channel) keys.
std::vector<RssSeries> parse_trace(std::string_view text);

std::string format_nodes(std::span<const NodeGeometry> nodes);
std::vector<NodeGeometry> parse_nodes(std::string_view text);

std::string format_meta(const TraceMeta& meta);
TraceMeta parse_meta(std::string_view text);

std::string format_truth(const GroundTruth& truth);
GroundTruth parse_truth(std::string_view text);

/// Trace plus its nodes and meta companions.
void write_trace(const fs::path& path, const Trace& trace);
Trace read_trace(const fs::path& path);

/// Estimator and imaging settings. Keys default to the published parameter
/// tables when absent.
struct RunConfig {
  EstimatorConfig estimator;
  /// Overrides window_length / ttest_group_size once T is known.
  std::optional<double> window_seconds;
  std::optional<double> ttest_group_seconds;
  ImagingParams imaging;
  Method method = Method::breakpoint;
  Method localization_method = Method::basic;
  std::optional<fs::path> rates_out;
  std::optional<fs::path> locations_out;
  std::optional<fs::path> image_dir;

  /// Applies the trace's sampling period and any seconds-based overrides.
  EstimatorConfig resolved_estimator(double sample_period) const;
};

RunConfig parse_run_config(const KeyValues& kv);
RunConfig load_run_config(const fs::path& path);
KeyValues to_key_values(const RunConfig& config);

/// Scenario description for the simulator (layout presets "nap",
/// "apartment", or "nodes_file").
ScenarioConfig parse_scenario(const KeyValues& kv, const fs::path& base_dir);

struct RateRow {
  double time_s = 0;
  double bpm = 0;
  bool motion = false;
  double median_bpm = 0;
};

struct LocationRow {
  double time_s = 0;
  Eigen::Vector2d location = Eigen::Vector2d::Zero();
  double max_pixel = 0;
  bool degenerate = false;
};

std::string format_rates(std::span<const RateRow> rows);
std::vector<RateRow> parse_rates(std::string_view text);

std::string format_locations(std::span<const LocationRow> rows);
/// Skips the trailing "mean" row.
std::vector<LocationRow> parse_locations(std::string_view text);

/// Row y of the grid on line y, pixel values separated by commas.
std::string format_image(const Eigen::VectorXd& values, const PixelGrid& grid);

std::vector<std::string_view> split(std::string_view line, char sep);

}  // namespace breathfind::io
