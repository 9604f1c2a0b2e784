#include <doctest.h>

#include <cmath>
#include <random>

#include "breathfind/rate.hpp"
#include "breathfind/simulator.hpp"
#include "oracles.hpp"

using namespace breathfind;
using doctest::Approx;

namespace {

RssFrame frame_from(const Eigen::MatrixXd& samples, SampleIndex start = 0) {
  RssFrame f;
  f.start = start;
  f.samples = samples;
  for (Eigen::Index l = 0; l < samples.rows(); ++l) f.links.push_back({0, 1, static_cast<int>(l)});
  return f;
}

bool on_grid(double f, const FrequencyGrid& g) {
  const Eigen::VectorXd freqs = g.frequencies();
  return (freqs.array() == f).any();
}

// First 30 s window of the apartment scenario, optionally with one step mid-window.
RssFrame apartment_window(bool with_step) {
  auto c = apartment_scenario(40.0, 5);
  if (with_step) c.motion_events = {{15.0, 0.2, 6.0, 0.0}};
  const auto sc = generate(c);
  return extract_frame(sc.series, 69, 70);
}

}  // namespace

TEST_CASE("method names") {
  CHECK(parse_method("basic") == Method::basic);
  CHECK(parse_method("breakpoint") == Method::breakpoint);
  CHECK(to_string(Method::breakpoint) == "breakpoint");
  CHECK_THROWS_AS(parse_method("fft"), InvalidConfiguration);
  CHECK(hz_to_bpm(0.1) == Approx(6.0));
  CHECK(bpm_to_hz(12.0) == Approx(0.2));
}

TEST_CASE("defaults follow the published parameter table") {
  const EstimatorConfig c;
  CHECK(c.window_length == 70);
  CHECK(c.grid.f_min == 0.1);
  CHECK(c.grid.f_max == 0.4);
  CHECK(c.sample_period == 0.428);
  CHECK(c.ttest.group_size == 14);
  CHECK(c.ttest.gamma == 0.8);
  CHECK(c.ttest.epsilon == 0.5);
  CHECK(c.hop_seconds == 5.0);
  CHECK(c.median_span_seconds == 90.0);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("clean apartment window recovers 10 bpm") {
  const auto frame = apartment_window(false);
  REQUIRE(frame.link_count() == 4224);
  const EstimatorConfig config;
  for (Method m : {Method::basic, Method::breakpoint}) {
    const auto est = estimate_rate(frame, config, m);
    CHECK(std::abs(est.bpm() - 10.0) <= 0.3);
    CHECK_FALSE(est.degenerate);
    CHECK(est.link_psd.size() == 4224);
    CHECK((est.link_psd.array() >= 0).all());
    CHECK(est.window_end == 69);
  }
}

TEST_CASE("a step mid-window rails basic and not breakpoint") {
  const auto frame = apartment_window(true);
  const EstimatorConfig config;
  const auto basic = estimate_rate(frame, config, Method::basic);
  const auto bp = estimate_rate(frame, config, Method::breakpoint);
  CHECK(basic.f_hat == config.grid.f_min);
  CHECK(std::abs(bp.bpm() - 10.0) <= 0.3);
  CHECK(bp.motion_detected);
  CHECK_FALSE(basic.motion_detected);
  CHECK_FALSE(bp.breakpoints.empty());
}

TEST_CASE("noise-only frames give an estimate inside the band") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> noise(-60, 1);
  Eigen::MatrixXd r(30, 70);
  for (auto& x : r.reshaped()) x = noise(rng);
  const EstimatorConfig config;
  for (Method m : {Method::basic, Method::breakpoint}) {
    const auto est = estimate_rate(frame_from(r, 200), config, m);
    CHECK(est.f_hat >= config.grid.f_min);
    CHECK(est.f_hat <= config.grid.f_max);
    CHECK(on_grid(est.f_hat, config.grid));
  }
}

TEST_CASE("all-zero signal is reported as degenerate") {
  const EstimatorConfig config;
  const auto frame = frame_from(Eigen::MatrixXd::Constant(4, 70, -55.0));
  const auto b = estimate_rate(frame, config, Method::basic);
  CHECK(b.degenerate);
  CHECK(b.f_hat == config.grid.f_min);
  CHECK_FALSE(b.motion_detected);
  CHECK(b.link_psd.isZero(0));
  const auto p = estimate_rate(frame, config, Method::breakpoint);
  CHECK(p.degenerate);
  CHECK(p.motion_detected);
}

TEST_CASE("empty frame is rejected") {
  CHECK_THROWS_AS(estimate_rate(RssFrame{}, EstimatorConfig{}, Method::basic), EmptyFrameError);
}

TEST_CASE("estimate invariants on random frames") {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> noise(0, 1);
  const EstimatorConfig config;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd r(8, 70);
    for (int l = 0; l < 8; ++l) {
      for (int n = 0; n < 70; ++n) r(l, n) = -60 + 0.6 * std::sin(0.1 * (trial + 5) * n + l) + noise(rng);
    }
    const auto base = estimate_rate(frame_from(r, 35 * trial), config, Method::basic);
    CHECK(on_grid(base.f_hat, config.grid));

    const auto scaled = estimate_rate(frame_from(2.5 * r, 35 * trial), config, Method::basic);
    CHECK(scaled.f_hat == base.f_hat);

    Eigen::MatrixXd extra(9, 70);
    extra << r, Eigen::RowVectorXd::Constant(70, -40.0);
    CHECK(estimate_rate(frame_from(extra, 35 * trial), config, Method::basic).f_hat == base.f_hat);
  }
}

TEST_CASE("breakpoint method without breakpoints is bit-identical to basic") {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> noise(0, 0.3);
  Eigen::MatrixXd r(12, 70);
  for (int l = 0; l < 12; ++l) {
    for (int n = 0; n < 70; ++n) r(l, n) = -60 + std::sin(2 * 3.14159 * 0.2 * 0.428 * n + l) + noise(rng);
  }
  const EstimatorConfig config;
  const auto frame = frame_from(r, 1000);
  const auto basic = estimate_rate(frame, config, Method::basic);
  const auto bp = estimate_rate(frame, config, Method::breakpoint);
  REQUIRE_FALSE(bp.motion_detected);
  CHECK(bp.f_hat == basic.f_hat);
  CHECK(bp.link_psd == basic.link_psd);
}

TEST_CASE("window end placement") {
  EstimatorConfig c;
  const auto ends = window_ends(701, c);
  REQUIRE(!ends.empty());
  CHECK(ends[0] == 69);
  CHECK(ends[1] == 69 + std::llround(5.0 / 0.428));
  CHECK(ends.back() <= 700);
  for (std::size_t k = 0; k < ends.size(); ++k) {
    CHECK(ends[k] == 69 + std::llround(static_cast<double>(k) * 5.0 / 0.428));
  }
  CHECK(window_ends(69, c).empty());
  CHECK(window_ends(70, c).size() == 1);
}

TEST_CASE("sliding estimation skips windows without data") {
  Eigen::VectorXd v(400);
  for (int n = 0; n < 400; ++n) v[n] = -60 + std::sin(2 * 3.141592653589793 * (10.0 / 60.0) * 0.428 * n);
  for (int n = 100; n < 250; ++n) v[n] = RssSeries::missing_value();
  std::vector<RssSeries> s{RssSeries({0, 1, 0}, v)};
  const EstimatorConfig c;
  const auto all_ends = window_ends(400, c);
  const auto est = estimate_sliding(s, c, Method::basic);
  CHECK(est.size() < all_ends.size());
  CHECK_FALSE(est.empty());
  for (const auto& e : est) CHECK(std::abs(e.bpm() - 10.0) <= 0.3);
}

TEST_CASE("median smoothing") {
  std::vector<double> t(19), v(19, 12.0);
  for (int i = 0; i < 19; ++i) t[i] = 5.0 * i;

  SUBCASE("constant is unchanged") {
    CHECK(median_smooth(t, v, 90.0) == v);
  }
  SUBCASE("a lone outlier disappears") {
    v[9] = 30.0;
    const auto m = median_smooth(t, v, 90.0);
    CHECK(m[9] == 12.0);
  }
  SUBCASE("random series against a brute-force median") {
    std::mt19937_64 rng(34);
    std::uniform_real_distribution<double> u(6, 24);
    std::vector<double> times(120), values(120);
    for (int i = 0; i < 120; ++i) {
      times[i] = 5.0 * i + 0.001 * (i % 4);  // keeps every pair off the +-45 s edge
      values[i] = u(rng);
    }
    const auto m = median_smooth(times, values, 90.0);
    for (int i = 0; i < 120; ++i) {
      std::vector<double> near;
      for (int j = 0; j < 120; ++j) {
        if (std::abs(times[j] - times[i]) <= 45.0) near.push_back(values[j]);
      }
      CHECK(m[i] == Approx(oracle::median(near)).epsilon(1e-15));
    }
  }
  SUBCASE("even neighbourhoods average the middle pair") {
    const std::vector<double> tt{0, 10}, vv{4, 8};
    const auto m = median_smooth(tt, vv, 20.0);
    CHECK(m[0] == 6.0);
    CHECK(m[1] == 6.0);
  }
  SUBCASE("length mismatch") {
    std::vector<double> shorter(3);
    CHECK_THROWS_AS(median_smooth(t, shorter, 90.0), DimensionMismatch);
  }
}

TEST_CASE("rate metrics") {
  std::vector<RateSample> s;
  for (int i = 0; i < 20; ++i) s.push_back({5.0 * i, 12.0, false});

  SUBCASE("perfect") {
    const auto m = evaluate_rates(s, 12.0);
    CHECK(*m.fraction_acceptable == 1.0);
    CHECK(*m.mean_abs_error_bpm == 0.0);
    CHECK(m.rms_median_bpm == 0.0);
    CHECK(m.low_count == 0);
  }
  SUBCASE("alternating just inside the boundary") {
    for (int i = 0; i < 20; ++i) s[i].bpm = 12.0 + (i % 2 ? 2.9 : -2.9);
    const auto m = evaluate_rates(s, 12.0);
    CHECK(*m.fraction_acceptable == 1.0);
    CHECK(*m.mean_abs_error_bpm == Approx(2.9));
  }
  SUBCASE("outside the boundary") {
    s[0].bpm = 15.5;
    s[1].bpm = 8.4;
    const auto m = evaluate_rates(s, 12.0);
    CHECK(*m.fraction_acceptable == Approx(18.0 / 20.0));
  }
  SUBCASE("low estimates split by motion") {
    s[3] = {15, 6.0, true};
    s[4] = {20, 6.0, true};
    s[5] = {25, 7.5, false};
    const auto m = evaluate_rates(s, std::nullopt);
    CHECK_FALSE(m.fraction_acceptable.has_value());
    CHECK(m.low_count == 3);
    CHECK(m.low_with_motion == 2);
    CHECK(m.low_without_motion == 1);
  }
  SUBCASE("rms-median against a direct recomputation") {
    std::mt19937_64 rng(35);
    std::normal_distribution<double> u(12, 2);
    for (auto& x : s) x.bpm = u(rng);
    const auto m = evaluate_rates(s, std::nullopt, 90.0);
    double sq = 0;
    for (const auto& a : s) {
      std::vector<double> near;
      for (const auto& b : s) {
        if (std::abs(a.time_s - b.time_s) <= 45.0) near.push_back(b.bpm);
      }
      const double d = a.bpm - oracle::median(near);
      sq += d * d;
    }
    CHECK(m.rms_median_bpm == Approx(std::sqrt(sq / s.size())).epsilon(1e-12));
  }
  SUBCASE("nothing to evaluate") {
    CHECK_THROWS_AS(evaluate_rates({}, 12.0), DataError);
  }
}
