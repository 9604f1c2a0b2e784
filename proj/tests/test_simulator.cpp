#include <doctest.h>

#include <cmath>
#include <cstring>
#include <set>

#include "breathfind/simulator.hpp"
#include "breathfind/spectral.hpp"

using namespace breathfind;
using doctest::Approx;

namespace {

ScenarioConfig square(double duration_s = 60) {
  ScenarioConfig c;
  c.nodes = {{0, {0, 0}}, {1, {4, 0}}, {2, {4, 4}}, {3, {0, 4}}};
  c.channels = 2;
  c.sample_period = 0.5;
  c.duration_s = duration_s;
  c.person = {{2.0, 0.1}, 12.0, 0.8};
  c.noise_sigma_db = 0.4;
  c.seed = 9;
  return c;
}

}  // namespace

TEST_CASE("silent scenario is flat at baseline") {
  auto c = square();
  c.person.amplitude_db = 0;
  c.noise_sigma_db = 0;
  const auto sc = generate(c);
  REQUIRE(sc.series.size() == 24);
  for (const auto& s : sc.series) {
    CHECK(s.size() == 120);
    CHECK((s.samples().array() == s.samples()[0]).all());
    CHECK(s.samples()[0] >= -70.0);
    CHECK(s.samples()[0] <= -50.0);
  }
}

TEST_CASE("same seed gives identical output, different seed does not") {
  auto c = square();
  c.motion_events = {{10.0, 0.5, 6.0, 2.0}};
  c.missing_probability = 0.05;
  c.quantize = true;
  const auto a = generate(c);
  const auto b = generate(c);
  REQUIRE(a.series.size() == b.series.size());
  for (std::size_t l = 0; l < a.series.size(); ++l) {
    CHECK(a.series[l].link() == b.series[l].link());
    CHECK(a.series[l].missing_mask().matrix() == b.series[l].missing_mask().matrix());
    const auto& x = a.series[l].samples();
    const auto& y = b.series[l].samples();
    for (Eigen::Index n = 0; n < x.size(); ++n) {
      if (!a.series[l].missing(n)) CHECK(std::memcmp(&x[n], &y[n], sizeof(double)) == 0);
    }
  }
  c.seed = 10;
  const auto d = generate(c);
  CHECK_FALSE(d.series[0].samples().isApprox(a.series[0].samples()));
}

TEST_CASE("ground truth is carried through") {
  auto c = square();
  c.motion_events = {{10.0, 0.5, 6.0, 2.0}, {40.0, 0.2, -3.0, 0.0}};
  const auto sc = generate(c);
  CHECK(sc.truth.rate_bpm == 12.0);
  CHECK(sc.truth.position == c.person.position);
  CHECK(sc.truth.motion_event_times_s == std::vector<double>{10.0, 40.0});
  CHECK(sc.truth.duration_s == 60.0);
  CHECK(sc.links == enumerate_links(4, 2));
}

TEST_CASE("sensitivity geometry") {
  const Eigen::Vector2d a(0, 0), b(4, 0);
  CHECK(link_sensitivity(a, b, {2, 0}, 1.0, 0.5) == 1.0);
  CHECK(link_sensitivity(a, b, {2, 0.5}, 1.0, 0.5) == 1.0);  // inside the ellipse
  const double far = link_sensitivity(a, b, {2, 3}, 1.0, 0.5);
  CHECK(far > 0);
  CHECK(far < 0.05);
  const double excess = 2 * std::hypot(2.0, 3.0) - 4.0 - 1.0;
  CHECK(far == Approx(std::exp(-excess / 0.5)));
}

TEST_CASE("sensitive-link cap keeps the strongest links") {
  auto c = square();
  c.sensitive_links = 3;
  const auto sc = generate(c);
  CHECK((sc.amplitude_db.array() > 0).count() == 3);
  CHECK(sc.amplitude_db.maxCoeff() == Approx(0.8));
}

TEST_CASE("clean breathing has the closed-form spectral power") {
  auto c = square();
  c.noise_sigma_db = 0;
  const auto sc = generate(c);
  const double f = 12.0 / 60.0;  // 10-sample period at T = 0.5 s
  int checked = 0;
  for (std::size_t l = 0; l < sc.series.size(); ++l) {
    const double amp = sc.amplitude_db[static_cast<Eigen::Index>(l)];
    if (amp < 0.05) continue;
    for (SampleIndex start : {0, 13, 50}) {
      const Eigen::VectorXd y = remove_mean_basic(sc.series[l].samples().segment(start, 70));
      const double expect = std::pow(70.0 * amp / 2.0, 2);
      CHECK(std::abs(psd_at(y, f, 0.5, start) - expect) <= 1e-6 * expect);
    }
    ++checked;
  }
  CHECK(checked >= 2);
}

TEST_CASE("motion events add a transient then a step on the chosen links") {
  auto quiet = square(100);
  quiet.channels = 5;
  auto moving = quiet;
  moving.motion_events = {{30.0, 0.2, 6.0, 4.0}};
  const auto a = generate(quiet);
  const auto b = generate(moving);
  const SampleIndex first = 60, settle = 68;  // 30 s and 34 s at T = 0.5
  int affected = 0;
  for (std::size_t l = 0; l < a.series.size(); ++l) {
    const Eigen::VectorXd d = b.series[l].samples() - a.series[l].samples();
    if (d.isZero(0)) continue;
    ++affected;
    CHECK(d.head(first).isZero(0));
    CHECK((d.tail(d.size() - settle).array() - 6.0).abs().maxCoeff() < 1e-9);
  }
  CHECK(affected == static_cast<int>(std::llround(0.2 * 60)));
}

TEST_CASE("measured step size matches the configuration") {
  auto c = square(100);
  c.channels = 5;
  c.person.amplitude_db = 0;
  c.noise_sigma_db = 0.5;
  c.motion_events = {{50.0, 0.5, 4.0, 0.0}};
  auto still = c;
  still.motion_events.clear();
  const auto sc = generate(c);
  const auto ref = generate(still);
  const int q = 14;
  const SampleIndex at = 100;
  double sum = 0;
  int affected = 0;
  for (std::size_t l = 0; l < sc.series.size(); ++l) {
    if ((sc.series[l].samples() - ref.series[l].samples()).isZero(0)) continue;
    const auto& r = sc.series[l].samples();
    sum += r.segment(at, q).mean() - r.segment(at - q, q).mean();
    ++affected;
  }
  REQUIRE(affected == 30);
  CHECK(std::abs(sum / affected - 4.0) <= 3 * 0.5 / std::sqrt(static_cast<double>(q)));
}

TEST_CASE("quantization and missing samples") {
  auto c = square(200);
  c.quantize = true;
  c.missing_probability = 0.1;
  const auto sc = generate(c);
  std::size_t missing = 0, total = 0;
  for (const auto& s : sc.series) {
    for (Eigen::Index n = 0; n < s.size(); ++n) {
      ++total;
      if (s.missing(n)) {
        ++missing;
      } else {
        CHECK(s.samples()[n] == std::round(s.samples()[n]));
      }
    }
  }
  const double frac = static_cast<double>(missing) / static_cast<double>(total);
  CHECK(frac > 0.08);
  CHECK(frac < 0.12);
}

TEST_CASE("invalid scenarios are rejected") {
  auto c = square();
  c.person.rate_bpm = 70;  // above Nyquist at T = 0.5
  CHECK_THROWS_AS(generate(c), InvalidConfiguration);
  c = square();
  c.noise_sigma_db = -1;
  CHECK_THROWS_AS(generate(c), InvalidConfiguration);
  c = square();
  c.nodes[2].node_id = 7;
  CHECK_THROWS_AS(generate(c), InvalidConfiguration);
  c = square();
  c.nodes.resize(1);
  CHECK_THROWS_AS(generate(c), InvalidConfiguration);
  c = square();
  c.motion_events = {{1.0, 1.5, 6.0, 0.0}};
  CHECK_THROWS_AS(generate(c), InvalidConfiguration);
}

TEST_CASE("periodic motion places one event per slot") {
  const auto ev = periodic_motion(300, 2.0, 0.2, 6.0, 1.5, 4);
  REQUIRE(ev.size() == 10);
  for (std::size_t i = 0; i < ev.size(); ++i) {
    CHECK(ev[i].time_s >= 30.0 * i);
    CHECK(ev[i].time_s < 30.0 * (i + 1));
    CHECK(ev[i].step_db == 6.0);
    CHECK(ev[i].transient_s == 1.5);
  }
  const auto again = periodic_motion(300, 2.0, 0.2, 6.0, 1.5, 4);
  CHECK(again[3].time_s == ev[3].time_s);
  CHECK_THROWS_AS(periodic_motion(300, 0.0, 0.2, 6.0, 0, 1), InvalidConfiguration);
}

TEST_CASE("deployment presets") {
  const auto apt = apartment_layout();
  CHECK(apt.size() == 33);
  for (const auto& n : apt) {
    const bool on_wall = n.position.x() == Approx(0) || n.position.x() == Approx(7) ||
                         n.position.y() == Approx(0) || n.position.y() == Approx(8);
    CHECK(on_wall);
  }
  const auto nap = nap_layout();
  CHECK(nap.size() == 12);
  for (const auto& n : nap) {
    CHECK(n.position.x() >= 0);
    CHECK(n.position.x() <= 5.3);
    CHECK(n.position.y() >= 0);
    CHECK(n.position.y() <= 5.3);
  }
  const auto c = nap_scenario(3960, 1);
  CHECK(c.channels == 5);
  CHECK(c.sample_period == 0.1796);
  CHECK(std::abs(c.sample_count() - 22049) <= 1);
  CHECK_NOTHROW(c.validate());
  const auto a = apartment_scenario(300, 1);
  CHECK(a.channels == 4);
  CHECK(a.sample_period == 0.428);
  CHECK(a.sensitive_links == 15);
  CHECK_NOTHROW(a.validate());
}
