#include "breathfind/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace breathfind::commands {

namespace {

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

io::RunConfig run_config(const std::optional<fs::path>& path) {
  return path ? io::load_run_config(*path) : io::RunConfig{};
}

}  // namespace

std::vector<int> parse_id_list(std::string_view text) {
  std::vector<int> ids;
  for (auto field : io::split(text, ',')) {
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    if (field.empty()) continue;
    int value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || value < 0) {
      throw InvalidConfiguration("bad id '" + std::string(field) + "' in list");
    }
    ids.push_back(value);
  }
  return ids;
}

std::vector<RssSeries> filter_links(std::span<const RssSeries> series, const LinkFilter& filter) {
  auto keep = [](const std::vector<int>& allowed, int id) {
    return allowed.empty() || std::find(allowed.begin(), allowed.end(), id) != allowed.end();
  };
  std::vector<RssSeries> out;
  for (const auto& s : series) {
    const LinkKey& k = s.link();
    if (keep(filter.nodes, k.tx) && keep(filter.nodes, k.rx) && keep(filter.channels, k.channel)) {
      out.push_back(s);
    }
  }
  if (out.empty()) throw DataError("node/channel subset leaves no links");
  return out;
}

Scenario simulate(const SimulateOptions& options) {
  io::KeyValues kv;
  fs::path base = ".";
  if (!options.scenario.empty()) {
    kv = io::KeyValues::load(options.scenario);
    base = options.scenario.parent_path();
  }
  if (options.seed) kv.set("seed", std::to_string(*options.seed));
  const ScenarioConfig config = io::parse_scenario(kv, base);

  Scenario sc = generate(config);
  io::Trace trace;
  trace.meta = {sc.sample_period, static_cast<int>(sc.nodes.size()), sc.channels};
  trace.nodes = sc.nodes;
  trace.series = sc.series;
  io::write_trace(options.trace_out, trace);
  io::write_file_atomic(io::companion_path(options.trace_out, ".truth"), io::format_truth(sc.truth));
  return sc;
}

std::vector<io::RateRow> rate_rows(std::span<const RateEstimate> estimates, double sample_period,
                                   double median_span_s) {
  std::vector<double> times, bpm;
  for (const auto& e : estimates) {
    times.push_back(static_cast<double>(e.window_end) * sample_period);
    bpm.push_back(e.bpm());
  }
  const auto median = median_smooth(times, bpm, median_span_s);
  std::vector<io::RateRow> rows;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    rows.push_back({times[i], bpm[i], estimates[i].motion_detected, median[i]});
  }
  return rows;
}

std::vector<io::RateRow> estimate(const EstimateOptions& options) {
  const io::RunConfig cfg = run_config(options.config);
  const io::Trace trace = io::read_trace(options.trace);
  const EstimatorConfig est = cfg.resolved_estimator(trace.meta.sample_period);
  const auto series = filter_links(trace.series, options.filter);
  const Method method = options.method.value_or(cfg.method);

  const auto estimates = estimate_sliding(series, est, method);
  auto rows = rate_rows(estimates, est.sample_period, est.median_span_seconds);

  const auto out = options.out ? options.out : cfg.rates_out;
  if (out) io::write_file_atomic(*out, io::format_rates(rows));
  return rows;
}

LocalizeResult localize_series(std::span<const RssSeries> series, std::span<const NodeGeometry> nodes,
                               const EstimatorConfig& estimator, const ImagingParams& imaging,
                               Method method, std::vector<BreathingImage>* images) {
  std::vector<LinkKey> links;
  for (const auto& s : series) links.push_back(s.link());

  LocalizeResult result;
  const auto build_start = std::chrono::steady_clock::now();
  const ImagingModel model(nodes, links, imaging);
  result.model_build_seconds = elapsed_seconds(build_start);
  result.pixels = model.grid().size();
  result.grid_nx = model.grid().nx();
  result.grid_ny = model.grid().ny();

  SampleIndex sample_count = 0;
  for (const auto& s : series) sample_count = std::max(sample_count, s.size());

  const auto window_start = std::chrono::steady_clock::now();
  for (SampleIndex end : window_ends(sample_count, estimator)) {
    RssFrame frame;
    try {
      frame = extract_frame(series, end, estimator.window_length);
    } catch (const EmptyFrameError&) {
      continue;
    }
    const RateEstimate est = estimate_rate(frame, estimator, method);
    BreathingImage img = model.image(est.links, est.link_psd);
    result.rows.push_back({static_cast<double>(end) * estimator.sample_period, img.location,
                           img.peak_value(), img.degenerate});
    if (images) images->push_back(std::move(img));
  }
  result.window_seconds_total = elapsed_seconds(window_start);
  return result;
}

LocalizeResult localize(const LocalizeOptions& options) {
  const io::RunConfig cfg = run_config(options.config);
  const io::Trace trace = io::read_trace(options.trace);
  const EstimatorConfig est = cfg.resolved_estimator(trace.meta.sample_period);
  const auto series = filter_links(trace.series, options.filter);

  const auto image_dir = options.image_dir ? options.image_dir : cfg.image_dir;
  std::vector<BreathingImage> images;
  LocalizeResult result = localize_series(series, trace.nodes, est, cfg.imaging,
                                          cfg.localization_method, image_dir ? &images : nullptr);

  const auto out = options.out ? options.out : cfg.locations_out;
  if (out) io::write_file_atomic(*out, io::format_locations(result.rows));
  if (image_dir) {
    const PixelGrid grid = PixelGrid::around_nodes(trace.nodes, cfg.imaging.pixel_width,
                                                   cfg.imaging.grid_padding);
    for (std::size_t i = 0; i < images.size(); ++i) {
      const auto end = static_cast<long long>(std::llround(result.rows[i].time_s / est.sample_period));
      char name[48];
      std::snprintf(name, sizeof name, "image_%07lld.csv", end);
      io::write_file_atomic(*image_dir / name, io::format_image(images[i].values, grid));
    }
  }
  return result;
}

EvaluationReport evaluate_rows(std::span<const io::RateRow> rates,
                               std::span<const io::LocationRow> locations, const GroundTruth& truth,
                               double median_span_s) {
  if (!rates.empty() && !locations.empty()) {
    bool match = rates.size() == locations.size();
    for (std::size_t i = 0; match && i < rates.size(); ++i) {
      match = std::abs(rates[i].time_s - locations[i].time_s) <= 5e-4;
    }
    if (!match) throw DataError("rate and location files use different window times");
  }
  if (rates.empty() && locations.empty()) throw DataError("nothing to evaluate");

  EvaluationReport report;
  if (!rates.empty()) {
    std::vector<RateSample> samples;
    for (const auto& r : rates) samples.push_back({r.time_s, r.bpm, r.motion});
    const std::optional<double> truth_bpm =
        std::isfinite(truth.rate_bpm) ? std::optional(truth.rate_bpm) : std::nullopt;
    report.rates = evaluate_rates(samples, truth_bpm, median_span_s);
  }
  if (!locations.empty()) {
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (const auto& l : locations) {
      sum += l.location;
      if (l.degenerate) ++report.degenerate_images;
    }
    report.mean_location = sum / static_cast<double>(locations.size());
    if (truth.position.allFinite()) {
      double abs_sum = 0, sq_sum = 0;
      for (const auto& l : locations) {
        const double err = (l.location - truth.position).norm();
        abs_sum += err;
        sq_sum += err * err;
      }
      const auto n = static_cast<double>(locations.size());
      report.mean_location_error_m = abs_sum / n;
      report.rms_location_error_m = std::sqrt(sq_sum / n);
    }
  }
  return report;
}

EvaluationReport evaluate(const EvaluateOptions& options) {
  std::vector<io::RateRow> rates;
  std::vector<io::LocationRow> locations;
  if (options.rates) rates = io::parse_rates(io::read_file(*options.rates));
  if (options.locations) locations = io::parse_locations(io::read_file(*options.locations));
  const GroundTruth truth = io::parse_truth(io::read_file(options.truth));
  EvaluationReport report = evaluate_rows(rates, locations, truth, options.median_span_s);
  if (options.out) io::write_file_atomic(*options.out, report.csv());
  return report;
}

namespace {

std::string num(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::string EvaluationReport::text() const {
  std::ostringstream out;
  if (rates) {
    out << "windows:               " << rates->count << "\n";
    if (rates->fraction_acceptable) {
      out << "acceptable (<=3 bpm):  " << num(100.0 * *rates->fraction_acceptable, 1) << " %\n";
      out << "mean rate error:       " << num(*rates->mean_abs_error_bpm, 3) << " bpm\n";
    }
    out << "RMS-median:            " << num(rates->rms_median_bpm, 3) << " bpm\n";
    out << "estimates below 9 bpm: " << rates->low_count << " (" << rates->low_with_motion
        << " with motion, " << rates->low_without_motion << " without)\n";
  }
  if (mean_location) {
    out << "mean location:         (" << num(mean_location->x(), 2) << ", "
        << num(mean_location->y(), 2) << ") m\n";
    out << "degenerate images:     " << degenerate_images << "\n";
  }
  if (mean_location_error_m) {
    out << "mean location error:   " << num(*mean_location_error_m, 3) << " m\n";
    out << "RMS location error:    " << num(*rms_location_error_m, 3) << " m\n";
  }
  return out.str();
}

std::string EvaluationReport::csv() const {
  std::string out = "metric,value\n";
  auto row = [&](const char* name, const std::string& value) { out += std::string(name) + "," + value + "\n"; };
  if (rates) {
    row("windows", std::to_string(rates->count));
    if (rates->fraction_acceptable) {
      row("fraction_acceptable", num(*rates->fraction_acceptable, 6));
      row("mean_abs_error_bpm", num(*rates->mean_abs_error_bpm, 6));
    }
    row("rms_median_bpm", num(rates->rms_median_bpm, 6));
    row("low_estimates", std::to_string(rates->low_count));
    row("low_estimates_with_motion", std::to_string(rates->low_with_motion));
    row("low_estimates_without_motion", std::to_string(rates->low_without_motion));
  }
  if (mean_location) {
    row("mean_location_x_m", num(mean_location->x(), 6));
    row("mean_location_y_m", num(mean_location->y(), 6));
    row("degenerate_images", std::to_string(degenerate_images));
  }
  if (mean_location_error_m) {
    row("mean_location_error_m", num(*mean_location_error_m, 6));
    row("rms_location_error_m", num(*rms_location_error_m, 6));
  }
  return out;
}

}  // namespace breathfind::commands
