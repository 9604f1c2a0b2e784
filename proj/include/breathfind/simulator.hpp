#pragma once

// Deterministic synthetic RSS traces with known breathing rate, breathing
// position and motion-event times.
//
// Each link follows
//   r_l[n] = baseline_l + A_l sin(2 pi f_b T n + phi_l) + motion_l[n] + noise
// where A_l = amplitude * s_l and s_l = exp(-excess_l / decay), excess_l
// being how far the person lies outside the link's ellipse
// (dist-sum - link length - lambda_e, floored at 0). This sensitivity model
// is a test stand-in, not a propagation model.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "breathfind/core.hpp"

namespace breathfind {

/// A movement: a zero-mean random walk on the affected links for
/// `transient_s` seconds, then a persistent level shift of `step_db`.
struct MotionEvent {
  double time_s = 0;
  double link_fraction = 0.2;
  double step_db = 6.0;
  double transient_s = 0;
};

struct PersonConfig {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double rate_bpm = 10.0;
  double amplitude_db = 0.5;
};

struct ScenarioConfig {
  std::vector<NodeGeometry> nodes;
  int channels = 5;
  double sample_period = 0.1796;
  double duration_s = 300;
  PersonConfig person;
  std::vector<MotionEvent> motion_events;
  double noise_sigma_db = 0.3;
  double baseline_mean_db = -60;
  double baseline_spread_db = 10;  // baselines uniform in mean +- spread
  bool quantize = false;           // round every sample to 1 dB
  double missing_probability = 0;
  double ellipse_lambda = 1.0;     // m
  double sensitivity_decay = 0.5;  // m
  /// When positive, only this many most-sensitive links carry breathing.
  int sensitive_links = 0;
  double transient_step_db = 1.0;  // random-walk increment std during motion
  std::uint64_t seed = 1;

  void validate() const;
  SampleIndex sample_count() const;
};

struct GroundTruth {
  double rate_bpm = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  std::vector<double> motion_event_times_s;
  double duration_s = 0;
};

struct Scenario {
  std::vector<NodeGeometry> nodes;
  int channels = 0;
  double sample_period = 0;
  std::vector<LinkKey> links;
  std::vector<RssSeries> series;  // aligned with links
  Eigen::VectorXd amplitude_db;   // A_l per link
  GroundTruth truth;
};

/// s_l in [0, 1]; exactly 1 when the person is inside the link ellipse.
double link_sensitivity(const Eigen::Vector2d& tx, const Eigen::Vector2d& rx,
                        const Eigen::Vector2d& person, double ellipse_lambda, double decay);

/// Bit-identical output for identical configs. Throws InvalidConfiguration on
/// bad parameters or geometry.
Scenario generate(const ScenarioConfig& config);

/// `per_minute` events per minute, one at a uniformly drawn time inside each
/// consecutive slot of 60/per_minute seconds.
std::vector<MotionEvent> periodic_motion(double duration_s, double per_minute, double link_fraction,
                                         double step_db, double transient_s, std::uint64_t seed);

/// 33 nodes evenly spaced around the walls of a 7 x 8 m apartment.
std::vector<NodeGeometry> apartment_layout();

/// 12 nodes in a 5.3 x 5.3 m bedroom: nodes 0..7 in raised/floor pairs at
/// the bed corners (0-3 at the head end), 8..11 at wall outlets.
std::vector<NodeGeometry> nap_layout();

/// Chest position of the sleeper used by the nap scenarios.
Eigen::Vector2d nap_chest_position();

/// Nap-style scenario: 12 nodes, C = 5, T = 0.1796 s.
ScenarioConfig nap_scenario(double duration_s, std::uint64_t seed);

/// Apartment-style scenario: 33 nodes, C = 4, T = 0.428 s, 10 bpm.
ScenarioConfig apartment_scenario(double duration_s, std::uint64_t seed);

}  // namespace breathfind
