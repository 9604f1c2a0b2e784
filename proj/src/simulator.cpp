#include "breathfind/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace breathfind {

namespace {

// Independent, reproducible stream per (seed, purpose, index...).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t purpose, std::uint64_t a,
                            std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    purpose,
                    static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

enum Stream : std::uint32_t { kLinkStream = 1, kEventLinks = 2, kEventWalk = 3, kEventTimes = 4 };

}  // namespace

void ScenarioConfig::validate() const {
  if (nodes.size() < 2) throw InvalidConfiguration("scenario needs at least two nodes");
  validate_nodes(nodes);
  std::vector<NodeId> ids;
  for (const auto& n : nodes) ids.push_back(n.node_id);
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] != static_cast<NodeId>(i)) {
      throw InvalidConfiguration("node ids must be 0..S-1");
    }
  }
  if (channels < 1) throw InvalidConfiguration("at least one channel is required");
  if (!(sample_period > 0)) throw InvalidConfiguration("sample period must be positive");
  if (!(duration_s > 0)) throw InvalidConfiguration("duration must be positive");
  const double nyquist_bpm = 60.0 * 0.5 / sample_period;
  if (!(person.rate_bpm > 0 && person.rate_bpm < nyquist_bpm)) {
    throw InvalidConfiguration("breathing rate must lie in (0, " + std::to_string(nyquist_bpm) +
                               ") bpm");
  }
  if (!person.position.allFinite()) throw InvalidConfiguration("non-finite person position");
  if (!(person.amplitude_db >= 0)) throw InvalidConfiguration("breathing amplitude must be >= 0");
  if (!(noise_sigma_db >= 0)) throw InvalidConfiguration("noise sigma must be >= 0");
  if (!(baseline_spread_db >= 0)) throw InvalidConfiguration("baseline spread must be >= 0");
  if (!(missing_probability >= 0 && missing_probability < 1)) {
    throw InvalidConfiguration("missing probability must lie in [0, 1)");
  }
  if (!(ellipse_lambda > 0)) throw InvalidConfiguration("ellipse size parameter must be positive");
  if (!(sensitivity_decay > 0)) throw InvalidConfiguration("sensitivity decay must be positive");
  if (sensitive_links < 0) throw InvalidConfiguration("sensitive link count must be >= 0");
  if (!(transient_step_db >= 0)) throw InvalidConfiguration("transient step must be >= 0");
  for (const auto& e : motion_events) {
    if (!(e.link_fraction >= 0 && e.link_fraction <= 1)) {
      throw InvalidConfiguration("motion link fraction must lie in [0, 1]");
    }
    if (!(e.transient_s >= 0) || !std::isfinite(e.time_s) || !std::isfinite(e.step_db)) {
      throw InvalidConfiguration("invalid motion event");
    }
  }
}

SampleIndex ScenarioConfig::sample_count() const {
  return static_cast<SampleIndex>(std::floor(duration_s / sample_period + 1e-9));
}

double link_sensitivity(const Eigen::Vector2d& tx, const Eigen::Vector2d& rx,
                        const Eigen::Vector2d& person, double ellipse_lambda, double decay) {
  const double excess =
      (tx - person).norm() + (rx - person).norm() - (tx - rx).norm() - ellipse_lambda;
  return std::exp(-std::max(0.0, excess) / decay);
}

Scenario generate(const ScenarioConfig& config) {
  config.validate();

  Scenario sc;
  sc.nodes = config.nodes;
  std::sort(sc.nodes.begin(), sc.nodes.end(),
            [](const NodeGeometry& a, const NodeGeometry& b) { return a.node_id < b.node_id; });
  sc.channels = config.channels;
  sc.sample_period = config.sample_period;
  sc.links = enumerate_links(static_cast<int>(sc.nodes.size()), config.channels);
  sc.truth.rate_bpm = config.person.rate_bpm;
  sc.truth.position = config.person.position;
  sc.truth.duration_s = config.duration_s;
  for (const auto& e : config.motion_events) sc.truth.motion_event_times_s.push_back(e.time_s);

  const auto link_count = static_cast<Eigen::Index>(sc.links.size());
  const SampleIndex samples = config.sample_count();

  // Breathing amplitude per link.
  Eigen::VectorXd sensitivity(link_count);
  for (Eigen::Index l = 0; l < link_count; ++l) {
    const LinkKey& k = sc.links[static_cast<std::size_t>(l)];
    sensitivity[l] = link_sensitivity(sc.nodes[static_cast<std::size_t>(k.tx)].position,
                                      sc.nodes[static_cast<std::size_t>(k.rx)].position,
                                      config.person.position, config.ellipse_lambda,
                                      config.sensitivity_decay);
  }
  if (config.sensitive_links > 0 && config.sensitive_links < link_count) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(link_count));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return sensitivity[a] > sensitivity[b]; });
    Eigen::VectorXd kept = Eigen::VectorXd::Zero(link_count);
    for (int i = 0; i < config.sensitive_links; ++i) {
      kept[order[static_cast<std::size_t>(i)]] = sensitivity[order[static_cast<std::size_t>(i)]];
    }
    sensitivity = kept;
  }
  sc.amplitude_db = config.person.amplitude_db * sensitivity;

  const double omega = 2.0 * std::numbers::pi * (config.person.rate_bpm / 60.0) * config.sample_period;
  std::vector<Eigen::VectorXd> rss(static_cast<std::size_t>(link_count));
  for (Eigen::Index l = 0; l < link_count; ++l) {
    auto rng = make_stream(config.seed, kLinkStream, static_cast<std::uint64_t>(l));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    const double baseline = config.baseline_mean_db + config.baseline_spread_db * (2.0 * unit(rng) - 1.0);
    Eigen::VectorXd r(samples);
    for (SampleIndex n = 0; n < samples; ++n) {
      r[n] = baseline + sc.amplitude_db[l] * std::sin(omega * static_cast<double>(n) + phase) +
             config.noise_sigma_db * noise(rng);
    }
    rss[static_cast<std::size_t>(l)] = std::move(r);
  }

  for (std::size_t e = 0; e < config.motion_events.size(); ++e) {
    const MotionEvent& ev = config.motion_events[e];
    auto pick = make_stream(config.seed, kEventLinks, e);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(link_count));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), pick);
    const auto affected = static_cast<std::size_t>(
        std::llround(ev.link_fraction * static_cast<double>(link_count)));
    order.resize(affected);
    std::sort(order.begin(), order.end());

    const auto first = static_cast<SampleIndex>(std::ceil(ev.time_s / config.sample_period - 1e-9));
    const double settle_time = ev.time_s + ev.transient_s;
    for (Eigen::Index l : order) {
      auto walk_rng = make_stream(config.seed, kEventWalk, e, static_cast<std::uint64_t>(l));
      std::normal_distribution<double> step(0.0, config.transient_step_db);
      Eigen::VectorXd& r = rss[static_cast<std::size_t>(l)];
      double walk = 0;
      for (SampleIndex n = std::max<SampleIndex>(0, first); n < samples; ++n) {
        const double t = static_cast<double>(n) * config.sample_period;
        if (t < settle_time - 1e-12) {
          walk += step(walk_rng);
          r[n] += walk;
        } else {
          r[n] += ev.step_db;
        }
      }
    }
  }

  sc.series.reserve(static_cast<std::size_t>(link_count));
  for (Eigen::Index l = 0; l < link_count; ++l) {
    Eigen::VectorXd& r = rss[static_cast<std::size_t>(l)];
    if (config.quantize) r = r.array().round();
    if (config.missing_probability > 0) {
      auto rng = make_stream(config.seed, kLinkStream, static_cast<std::uint64_t>(l), 1);
      std::bernoulli_distribution drop(config.missing_probability);
      for (SampleIndex n = 0; n < samples; ++n) {
        if (drop(rng)) r[n] = RssSeries::missing_value();
      }
    }
    sc.series.emplace_back(sc.links[static_cast<std::size_t>(l)], std::move(r));
  }
  return sc;
}

std::vector<MotionEvent> periodic_motion(double duration_s, double per_minute, double link_fraction,
                                         double step_db, double transient_s, std::uint64_t seed) {
  if (!(per_minute > 0)) throw InvalidConfiguration("motion rate must be positive");
  const double slot = 60.0 / per_minute;
  auto rng = make_stream(seed, kEventTimes, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<MotionEvent> events;
  for (double begin = 0; begin + 1e-9 < duration_s; begin += slot) {
    const double t = begin + unit(rng) * std::min(slot, duration_s - begin);
    events.push_back({t, link_fraction, step_db, transient_s});
  }
  return events;
}

std::vector<NodeGeometry> apartment_layout() {
  constexpr int kNodes = 33;
  constexpr double kWidth = 7.0;
  constexpr double kHeight = 8.0;
  constexpr double kPerimeter = 2 * (kWidth + kHeight);
  std::vector<NodeGeometry> nodes;
  for (int i = 0; i < kNodes; ++i) {
    double s = kPerimeter * i / kNodes;
    Eigen::Vector2d p;
    if (s < kWidth) {
      p = {s, 0.0};
    } else if ((s -= kWidth) < kHeight) {
      p = {kWidth, s};
    } else if ((s -= kHeight) < kWidth) {
      p = {kWidth - s, kHeight};
    } else {
      s -= kWidth;
      p = {0.0, kHeight - s};
    }
    nodes.push_back({i, p});
  }
  return nodes;
}

std::vector<NodeGeometry> nap_layout() {
  return {
      {0, {1.6, 5.0}}, {1, {1.6, 5.0}},  // head end, left of bed
      {2, {3.7, 5.0}}, {3, {3.7, 5.0}},  // head end, right of bed
      {4, {1.6, 2.8}}, {5, {1.6, 2.8}},  // foot end, left
      {6, {3.7, 2.8}}, {7, {3.7, 2.8}},  // foot end, right
      {8, {0.2, 0.3}}, {9, {5.1, 0.3}},  {10, {5.1, 3.0}}, {11, {0.2, 3.6}},
  };
}

Eigen::Vector2d nap_chest_position() { return {2.65, 4.1}; }

ScenarioConfig nap_scenario(double duration_s, std::uint64_t seed) {
  ScenarioConfig c;
  c.nodes = nap_layout();
  c.channels = 5;
  c.sample_period = 0.1796;
  c.duration_s = duration_s;
  c.person = {nap_chest_position(), 12.0, 0.5};
  c.noise_sigma_db = 3.0;
  c.quantize = true;
  c.seed = seed;
  c.motion_events = periodic_motion(duration_s, 0.2, 0.2, 3.0, 3.0, seed);
  return c;
}

ScenarioConfig apartment_scenario(double duration_s, std::uint64_t seed) {
  ScenarioConfig c;
  c.nodes = apartment_layout();
  c.channels = 4;
  c.sample_period = 0.428;
  c.duration_s = duration_s;
  c.person = {{2.0, 5.5}, 10.0, 1.0};
  c.noise_sigma_db = 0.3;
  c.sensitive_links = 15;
  c.seed = seed;
  return c;
}

}  // namespace breathfind
