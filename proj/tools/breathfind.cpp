// breathfind: simulate RSS traces, estimate breathing rate, localize the
// breathing person and evaluate the results.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "breathfind/commands.hpp"

namespace bf = breathfind;
namespace cmd = breathfind::commands;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

void add_subset_options(CLI::App* app, std::string& nodes, std::string& channels) {
  app->add_option("--nodes", nodes, "Comma-separated node ids to keep (default: all)");
  app->add_option("--channels", channels, "Comma-separated channel indices to keep (default: all)");
}

cmd::LinkFilter make_filter(const std::string& nodes, const std::string& channels) {
  return {cmd::parse_id_list(nodes), cmd::parse_id_list(channels)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Breathing rate estimation and localization from multi-link RSS traces"};
  app.require_subcommand(1);

  // simulate
  cmd::SimulateOptions sim;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic trace with ground truth");
  simulate->add_option("--scenario", scenario, "Scenario key=value file (default: nap preset)");
  simulate->add_option("--out", sim.trace_out, "Output trace CSV")->required();
  simulate->add_option("--seed", seed, "Random seed (overrides the scenario file)");

  // estimate
  cmd::EstimateOptions est;
  std::string est_config, est_method, est_nodes, est_channels, est_out;
  auto* estimate = app.add_subcommand("estimate", "Sliding-window breathing rate estimates");
  estimate->add_option("--trace", est.trace, "Trace CSV")->required();
  estimate->add_option("--config", est_config, "Run configuration key=value file");
  estimate->add_option("--method", est_method, "basic or breakpoint (default from config)");
  estimate->add_option("--out", est_out, "Output rate CSV");
  add_subset_options(estimate, est_nodes, est_channels);

  // localize
  cmd::LocalizeOptions loc;
  std::string loc_config, loc_nodes, loc_channels, loc_out, loc_images;
  auto* localize = app.add_subcommand("localize", "Breathing images and location estimates");
  localize->add_option("--trace", loc.trace, "Trace CSV")->required();
  localize->add_option("--config", loc_config, "Run configuration key=value file");
  localize->add_option("--out", loc_out, "Output location CSV");
  localize->add_option("--image-dir", loc_images, "Directory for per-window image CSVs");
  add_subset_options(localize, loc_nodes, loc_channels);

  // evaluate
  cmd::EvaluateOptions ev;
  std::string ev_rates, ev_locations, ev_out;
  auto* evaluate = app.add_subcommand("evaluate", "Compare estimates with ground truth");
  evaluate->add_option("--rates", ev_rates, "Rate CSV from 'estimate'");
  evaluate->add_option("--locations", ev_locations, "Location CSV from 'localize'");
  evaluate->add_option("--truth", ev.truth, "Ground-truth file from 'simulate'")->required();
  evaluate->add_option("--out", ev_out, "Metrics CSV");
  evaluate->add_option("--median-span", ev.median_span_s, "Median window for RMS-median (s)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  auto opt_path = [](const std::string& s) -> std::optional<std::filesystem::path> {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
  };

  try {
    if (*simulate) {
      sim.scenario = scenario;
      sim.seed = seed;
      const auto sc = cmd::simulate(sim);
      std::cerr << "wrote " << sc.links.size() << " links x " << (sc.series.empty() ? 0 : sc.series.front().size())
                << " samples to " << sim.trace_out.string() << "\n";
    } else if (*estimate) {
      est.config = opt_path(est_config);
      est.out = opt_path(est_out);
      if (!est_method.empty()) est.method = bf::parse_method(est_method);
      est.filter = make_filter(est_nodes, est_channels);
      const auto rows = cmd::estimate(est);
      if (!est.out && !est.config) std::cout << bf::io::format_rates(rows);
      std::cerr << rows.size() << " windows estimated\n";
    } else if (*localize) {
      loc.config = opt_path(loc_config);
      loc.out = opt_path(loc_out);
      loc.image_dir = opt_path(loc_images);
      loc.filter = make_filter(loc_nodes, loc_channels);
      const auto result = cmd::localize(loc);
      if (!loc.out && !loc.config) std::cout << bf::io::format_locations(result.rows);
      std::fprintf(stderr, "imaging model: %lld pixels (%lld x %lld), built in %.3f s\n",
                   static_cast<long long>(result.pixels), static_cast<long long>(result.grid_nx),
                   static_cast<long long>(result.grid_ny), result.model_build_seconds);
      const double per_window =
          result.rows.empty() ? 0.0 : result.window_seconds_total / static_cast<double>(result.rows.size());
      std::fprintf(stderr, "%zu windows, %.4f s per window\n", result.rows.size(), per_window);
    } else if (*evaluate) {
      ev.rates = opt_path(ev_rates);
      ev.locations = opt_path(ev_locations);
      ev.out = opt_path(ev_out);
      const auto report = cmd::evaluate(ev);
      std::cout << report.text();
    }
  } catch (const bf::InvalidConfiguration& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return 0;
}
