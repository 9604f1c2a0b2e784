#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "breathfind/commands.hpp"

using namespace breathfind;
namespace cmd = breathfind::commands;
namespace io = breathfind::io;
namespace fs = std::filesystem;
using doctest::Approx;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("breathfind_cmd_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
  const std::string command = std::string(BREATHFIND_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Short nap-layout trace, small enough for unit tests.
fs::path nap_trace(const TempDir& dir, double duration_s, const std::string& extra = "") {
  io::write_file_atomic(dir.path / "scenario.conf",
                        "layout=nap\nduration_s=" + std::to_string(duration_s) + "\nseed=5\n" + extra);
  cmd::SimulateOptions o;
  o.scenario = dir.path / "scenario.conf";
  o.trace_out = dir.path / "run.csv";
  cmd::simulate(o);
  return o.trace_out;
}

}  // namespace

TEST_CASE("id lists") {
  CHECK(cmd::parse_id_list("0,2, 4,6") == std::vector<int>{0, 2, 4, 6});
  CHECK(cmd::parse_id_list("").empty());
  CHECK_THROWS_AS(cmd::parse_id_list("1,x"), InvalidConfiguration);
  CHECK_THROWS_AS(cmd::parse_id_list("-1"), InvalidConfiguration);
}

TEST_CASE("link filters") {
  std::vector<RssSeries> series;
  for (const auto& k : enumerate_links(12, 5)) series.emplace_back(k, Eigen::VectorXd::Zero(3));
  CHECK(cmd::filter_links(series, {}).size() == 660);
  CHECK(cmd::filter_links(series, {{0, 2, 4, 6}, {}}).size() == 4 * 3 * 5);
  CHECK(cmd::filter_links(series, {{}, {2}}).size() == 660 / 5);
  const auto both = cmd::filter_links(series, {{1, 3, 5, 7}, {0, 4}});
  CHECK(both.size() == 4 * 3 * 2);
  for (const auto& s : both) {
    CHECK(s.link().tx % 2 == 1);
    CHECK(s.link().rx % 2 == 1);
  }
  CHECK_THROWS_AS(cmd::filter_links(series, {{0}, {}}), DataError);
  CHECK_THROWS_AS(cmd::filter_links(series, {{}, {9}}), DataError);
}

TEST_CASE("minimal two-node scenario round trips through estimate") {
  TempDir dir;
  io::write_file_atomic(dir.path / "nodes.csv", "node_id,x_m,y_m\n0,0,0\n1,2,0\n");
  io::write_file_atomic(dir.path / "two.conf",
                        "layout=custom\nnodes_file=nodes.csv\nchannels=1\nsample_period_s=0.428\n"
                        "duration_s=120\nperson_x_m=1\nperson_y_m=0\nrate_bpm=15\namplitude_db=1\n"
                        "noise_sigma_db=0.2\n");
  cmd::SimulateOptions o;
  o.scenario = dir.path / "two.conf";
  o.trace_out = dir.path / "two.csv";
  const auto sc = cmd::simulate(o);
  CHECK(sc.links.size() == 2);
  CHECK(fs::exists(dir.path / "two.truth"));

  cmd::EstimateOptions e;
  e.trace = o.trace_out;
  e.out = dir.path / "rates.csv";
  const auto rows = cmd::estimate(e);
  REQUIRE_FALSE(rows.empty());
  for (const auto& r : rows) CHECK(r.bpm == Approx(15.0).epsilon(0.02));
  CHECK(io::parse_rates(io::read_file(dir.path / "rates.csv")).size() == rows.size());
}

TEST_CASE("simulation output is byte-identical for a fixed seed") {
  TempDir a, b;
  const auto ta = nap_trace(a, 40);
  const auto tb = nap_trace(b, 40);
  CHECK(io::read_file(ta) == io::read_file(tb));
  CHECK(io::read_file(io::companion_path(ta, ".truth")) == io::read_file(io::companion_path(tb, ".truth")));

  cmd::SimulateOptions o;
  o.scenario = a.path / "scenario.conf";
  o.trace_out = a.path / "other.csv";
  o.seed = 6;
  cmd::simulate(o);
  CHECK(io::read_file(o.trace_out) != io::read_file(ta));
}

TEST_CASE("subset runs shrink the link set") {
  TempDir dir;
  const auto trace = nap_trace(dir, 90, "noise_sigma_db=1\n");
  io::write_file_atomic(dir.path / "run.conf", "window_seconds=30\nttest_group_seconds=5\n");
  cmd::EstimateOptions e;
  e.trace = trace;
  e.config = dir.path / "run.conf";
  const auto all = cmd::estimate(e);
  e.filter = {{0, 2, 4, 6}, {}};
  const auto even = cmd::estimate(e);
  e.filter = {{}, {3}};
  const auto one = cmd::estimate(e);
  CHECK(all.size() == even.size());
  CHECK(all.size() == one.size());
  e.filter = {{0}, {}};
  CHECK_THROWS_AS(cmd::estimate(e), DataError);
}

TEST_CASE("localize writes locations and images") {
  TempDir dir;
  const auto trace = nap_trace(dir, 60, "noise_sigma_db=1\n");
  io::write_file_atomic(dir.path / "run.conf", "window_seconds=30\nttest_group_seconds=5\n");
  cmd::LocalizeOptions l;
  l.trace = trace;
  l.config = dir.path / "run.conf";
  l.out = dir.path / "loc.csv";
  l.image_dir = dir.path / "img";
  const auto result = cmd::localize(l);
  REQUIRE_FALSE(result.rows.empty());
  CHECK(result.pixels == result.grid_nx * result.grid_ny);
  std::size_t images = 0;
  for (const auto& entry : fs::directory_iterator(dir.path / "img")) {
    ++images;
    const auto text = io::read_file(entry.path());
    CHECK(std::count(text.begin(), text.end(), '\n') == result.grid_ny);
  }
  CHECK(images == result.rows.size());
  const auto parsed = io::parse_locations(io::read_file(dir.path / "loc.csv"));
  CHECK(parsed.size() == result.rows.size());
  CHECK(io::read_file(dir.path / "loc.csv").find("\nmean,") != std::string::npos);
}

TEST_CASE("a silent trace produces degenerate images") {
  TempDir dir;
  const auto trace = nap_trace(dir, 40, "amplitude_db=0\nnoise_sigma_db=0\nquantize=false\nmotion_per_minute=0\n");
  cmd::LocalizeOptions l;
  l.trace = trace;
  const auto result = cmd::localize(l);
  REQUIRE_FALSE(result.rows.empty());
  for (const auto& r : result.rows) CHECK(r.degenerate);
}

TEST_CASE("evaluation") {
  GroundTruth truth;
  truth.rate_bpm = 12;
  truth.position = {2, 3};
  std::vector<io::RateRow> rates;
  std::vector<io::LocationRow> locs;
  for (int i = 0; i < 10; ++i) {
    rates.push_back({30.0 + 5 * i, 12.0, false, 12.0});
    locs.push_back({30.0 + 5 * i, {2, 3}, 1.0, false});
  }

  SUBCASE("perfect") {
    const auto r = cmd::evaluate_rows(rates, locs, truth, 90);
    CHECK(*r.rates->fraction_acceptable == 1.0);
    CHECK(*r.rates->mean_abs_error_bpm == 0.0);
    CHECK(*r.mean_location_error_m == 0.0);
    CHECK(*r.rms_location_error_m == 0.0);
    CHECK(r.text().find("100.0 %") != std::string::npos);
    CHECK(r.csv().rfind("metric,value\n", 0) == 0);
  }
  SUBCASE("one metre offset") {
    for (auto& l : locs) l.location.x() += 1.0;
    const auto r = cmd::evaluate_rows(rates, locs, truth, 90);
    CHECK(*r.mean_location_error_m == Approx(1.0));
    CHECK(*r.rms_location_error_m == Approx(1.0));
    CHECK(r.mean_location->isApprox(Eigen::Vector2d(3, 3)));
  }
  SUBCASE("mismatched window times") {
    locs[4].time_s += 2.5;
    CHECK_THROWS_AS(cmd::evaluate_rows(rates, locs, truth, 90), DataError);
    locs.pop_back();
    CHECK_THROWS_AS(cmd::evaluate_rows(rates, locs, truth, 90), DataError);
  }
  SUBCASE("rates only, no truth rate") {
    truth.rate_bpm = std::nan("");
    const auto r = cmd::evaluate_rows(rates, {}, truth, 90);
    CHECK_FALSE(r.rates->fraction_acceptable.has_value());
    CHECK_FALSE(r.mean_location.has_value());
  }
  SUBCASE("nothing given") {
    CHECK_THROWS_AS(cmd::evaluate_rows({}, {}, truth, 90), DataError);
  }
}

TEST_CASE("command-line exit codes") {
  TempDir dir;
  const std::string d = dir.path.string();
  io::write_file_atomic(dir.path / "s.conf", "layout=nap\nduration_s=40\nseed=2\n");
  CHECK(run_cli("simulate --scenario " + d + "/s.conf --out " + d + "/t.csv") == 0);
  CHECK(run_cli("estimate --trace " + d + "/t.csv --out " + d + "/r.csv") == 0);
  CHECK(run_cli("localize --trace " + d + "/t.csv --out " + d + "/l.csv") == 0);
  CHECK(run_cli("evaluate --rates " + d + "/r.csv --locations " + d + "/l.csv --truth " + d + "/t.truth --out " + d +
                "/m.csv") == 0);
  CHECK(fs::exists(dir.path / "m.csv"));

  // Usage and configuration problems.
  CHECK(run_cli("") == 1);
  CHECK(run_cli("estimate") == 1);
  CHECK(run_cli("estimate --trace " + d + "/t.csv --method fft") == 1);
  io::write_file_atomic(dir.path / "bad.conf", "layout=nap\nnoise_sigma_db=-1\n");
  CHECK(run_cli("simulate --scenario " + d + "/bad.conf --out " + d + "/x.csv") == 1);
  io::write_file_atomic(dir.path / "bad_run.conf", "no_such_key=1\n");
  CHECK(run_cli("estimate --trace " + d + "/t.csv --config " + d + "/bad_run.conf") == 1);

  // Data problems.
  CHECK(run_cli("estimate --trace " + d + "/missing.csv") == 2);
  CHECK(run_cli("estimate --trace " + d + "/t.csv --nodes 0") == 2);
  io::write_file_atomic(dir.path / "broken.csv", "sample_index,tx,rx,channel,rss_db\n0,0,1,0,x\n");
  fs::copy_file(dir.path / "t.meta", dir.path / "broken.meta");
  fs::copy_file(dir.path / "t.nodes.csv", dir.path / "broken.nodes.csv");
  CHECK(run_cli("estimate --trace " + d + "/broken.csv") == 2);
}
