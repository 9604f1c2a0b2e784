#include "breathfind/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace breathfind::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view field, std::string_view what) {
  field = trim(field);
  double value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError("cannot parse " + std::string(what) + " from '" + std::string(field) + "'");
  }
  return value;
}

long long to_int(std::string_view field, std::string_view what) {
  field = trim(field);
  long long value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError("cannot parse " + std::string(what) + " from '" + std::string(field) + "'");
  }
  return value;
}

std::string shortest(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

// Iterates the non-empty lines of `text`, skipping the header.
template <typename Fn>
void for_each_row(std::string_view text, std::string_view expected_header, Fn&& fn) {
  std::size_t pos = 0;
  bool header = true;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    if (header) {
      if (trim(line) != expected_header) {
        throw DataError("expected header '" + std::string(expected_header) + "'");
      }
      header = false;
      continue;
    }
    fn(line, line_no);
  }
  if (header) throw DataError("missing header '" + std::string(expected_header) + "'");
}

constexpr std::string_view kTraceHeader = "sample_index,tx,rx,channel,rss_db";
constexpr std::string_view kNodesHeader = "node_id,x_m,y_m";
constexpr std::string_view kRatesHeader = "window_end_time_s,f_hat_bpm,motion_flag,median_bpm";
constexpr std::string_view kLocationsHeader =
    "window_end_time_s,x_m,y_m,max_pixel_value,degenerate";

}  // namespace

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

// ---------------------------------------------------------------- KeyValues

KeyValues KeyValues::parse(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidConfiguration("line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw InvalidConfiguration("line " + std::to_string(line_no) + ": empty key");
    kv.values_[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValues KeyValues::load(const fs::path& path) { return parse(read_file(path)); }

std::optional<std::string> KeyValues::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KeyValues::get_double(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  try {
    return to_double(*v, key);
  } catch (const DataError& e) {
    throw InvalidConfiguration(e.what());
  }
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  return get_double(key).value_or(fallback);
}

long long KeyValues::get_int(const std::string& key, long long fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    return to_int(*v, key);
  } catch (const DataError& e) {
    throw InvalidConfiguration(e.what());
  }
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "1" || *v == "true" || *v == "yes") return true;
  if (*v == "0" || *v == "false" || *v == "no") return false;
  throw InvalidConfiguration("cannot parse boolean " + key + "=" + *v);
}

void KeyValues::require_known(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [key, value] : values_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InvalidConfiguration("unknown configuration key '" + key + "'");
    }
  }
}

std::string KeyValues::serialize() const {
  std::string out;
  for (const auto& [key, value] : values_) out += key + "=" + value + "\n";
  return out;
}

// ---------------------------------------------------------------- files

fs::path companion_path(const fs::path& trace, std::string_view suffix) {
  fs::path p = trace;
  p.replace_extension();
  p += std::string(suffix);
  return p;
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- trace

std::string format_trace(std::span<const RssSeries> series) {
  std::vector<const RssSeries*> ordered;
  SampleIndex length = 0;
  for (const auto& s : series) {
    ordered.push_back(&s);
    length = std::max(length, s.size());
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const RssSeries* a, const RssSeries* b) {
    return ChannelMajorLess{}(a->link(), b->link());
  });

  std::string out;
  out.reserve(static_cast<std::size_t>(length) * ordered.size() * 24 + 64);
  out += kTraceHeader;
  out += '\n';
  for (SampleIndex n = 0; n < length; ++n) {
    const std::string index = std::to_string(n);
    for (const RssSeries* s : ordered) {
      if (n >= s->size()) continue;
      const LinkKey& k = s->link();
      out += index;
      out += ',';
      out += std::to_string(k.tx);
      out += ',';
      out += std::to_string(k.rx);
      out += ',';
      out += std::to_string(k.channel);
      out += ',';
      if (!s->missing(n)) out += shortest(s->samples()[n]);
      out += '\n';
    }
  }
  return out;
}

std::vector<RssSeries> parse_trace(std::string_view text) {
  std::map<LinkKey, std::size_t, ChannelMajorLess> index;
  std::vector<LinkKey> keys;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<char>> seen;
  long long last_sample = -1;
  std::size_t last_slot = 0;

  for_each_row(text, kTraceHeader, [&](std::string_view line, std::size_t line_no) {
    const auto f = split(line, ',');
    const auto where = " on line " + std::to_string(line_no);
    if (f.size() != 5) throw DataError("expected 5 fields" + where);
    const long long n = to_int(f[0], "sample_index");
    if (n < 0) throw DataError("negative sample index" + where);
    if (n < last_sample) throw DataError("sample_index decreases" + where);
    last_sample = n;
    const LinkKey key{static_cast<NodeId>(to_int(f[1], "tx")), static_cast<NodeId>(to_int(f[2], "rx")),
                      static_cast<int>(to_int(f[3], "channel"))};
    if (key.tx == key.rx) throw DataError("tx equals rx" + where);
    if (key.channel < 0) throw DataError("negative channel" + where);

    std::size_t slot;
    if (!keys.empty() && keys[last_slot] == key) {
      slot = last_slot;
    } else {
      auto [it, inserted] = index.try_emplace(key, keys.size());
      if (inserted) {
        keys.push_back(key);
        values.emplace_back();
        seen.emplace_back();
      }
      slot = it->second;
    }
    last_slot = slot;

    auto& v = values[slot];
    auto& s = seen[slot];
    const auto un = static_cast<std::size_t>(n);
    if (v.size() <= un) {
      v.resize(un + 1, RssSeries::missing_value());
      s.resize(un + 1, 0);
    }
    if (s[un]) throw DataError("duplicate row for the same sample and link" + where);
    s[un] = 1;
    const auto rss = trim(f[4]);
    if (!rss.empty()) {
      const double value = to_double(rss, "rss_db");
      if (!std::isfinite(value)) throw DataError("non-finite rss_db" + where);
      v[un] = value;
    }
  });

  std::size_t length = 0;
  for (const auto& v : values) length = std::max(length, v.size());
  std::vector<RssSeries> series;
  series.reserve(keys.size());
  for (const auto& [key, slot] : index) {
    auto& v = values[slot];
    v.resize(length, RssSeries::missing_value());
    series.emplace_back(key, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return series;
}

std::string format_nodes(std::span<const NodeGeometry> nodes) {
  std::string out(kNodesHeader);
  out += '\n';
  for (const auto& n : nodes) {
    out += std::to_string(n.node_id) + "," + shortest(n.position.x()) + "," +
           shortest(n.position.y()) + "\n";
  }
  return out;
}

std::vector<NodeGeometry> parse_nodes(std::string_view text) {
  std::vector<NodeGeometry> nodes;
  for_each_row(text, kNodesHeader, [&](std::string_view line, std::size_t line_no) {
    const auto f = split(line, ',');
    if (f.size() != 3) throw DataError("expected 3 fields on nodes line " + std::to_string(line_no));
    nodes.push_back({static_cast<NodeId>(to_int(f[0], "node_id")),
                     {to_double(f[1], "x_m"), to_double(f[2], "y_m")}});
  });
  try {
    validate_nodes(nodes);
  } catch (const InvalidConfiguration& e) {
    throw DataError(e.what());
  }
  return nodes;
}

std::string format_meta(const TraceMeta& meta) {
  KeyValues kv;
  kv.set("sample_period_s", shortest(meta.sample_period));
  kv.set("nodes", std::to_string(meta.nodes));
  kv.set("channels", std::to_string(meta.channels));
  return kv.serialize();
}

TraceMeta parse_meta(std::string_view text) {
  try {
    const auto kv = KeyValues::parse(text);
    TraceMeta meta;
    const auto t = kv.get_double("sample_period_s");
    if (!t || !(*t > 0)) throw DataError("meta file needs a positive sample_period_s");
    meta.sample_period = *t;
    meta.nodes = static_cast<int>(kv.get_int("nodes", 0));
    meta.channels = static_cast<int>(kv.get_int("channels", 0));
    return meta;
  } catch (const InvalidConfiguration& e) {
    throw DataError(e.what());
  }
}

std::string format_truth(const GroundTruth& truth) {
  KeyValues kv;
  kv.set("rate_bpm", shortest(truth.rate_bpm));
  kv.set("person_x_m", shortest(truth.position.x()));
  kv.set("person_y_m", shortest(truth.position.y()));
  kv.set("duration_s", shortest(truth.duration_s));
  std::string times;
  for (std::size_t i = 0; i < truth.motion_event_times_s.size(); ++i) {
    if (i) times += ',';
    times += shortest(truth.motion_event_times_s[i]);
  }
  kv.set("motion_event_times_s", times);
  return kv.serialize();
}

GroundTruth parse_truth(std::string_view text) {
  try {
    const auto kv = KeyValues::parse(text);
    GroundTruth t;
    t.rate_bpm = kv.get_double("rate_bpm", std::nan(""));
    t.position = {kv.get_double("person_x_m", std::nan("")), kv.get_double("person_y_m", std::nan(""))};
    t.duration_s = kv.get_double("duration_s", 0);
    if (const auto times = kv.get("motion_event_times_s"); times && !times->empty()) {
      for (auto f : split(*times, ',')) t.motion_event_times_s.push_back(to_double(f, "motion time"));
    }
    return t;
  } catch (const InvalidConfiguration& e) {
    throw DataError(e.what());
  }
}

void write_trace(const fs::path& path, const Trace& trace) {
  write_file_atomic(path, format_trace(trace.series));
  write_file_atomic(companion_path(path, ".nodes.csv"), format_nodes(trace.nodes));
  write_file_atomic(companion_path(path, ".meta"), format_meta(trace.meta));
}

Trace read_trace(const fs::path& path) {
  Trace t;
  t.meta = parse_meta(read_file(companion_path(path, ".meta")));
  t.nodes = parse_nodes(read_file(companion_path(path, ".nodes.csv")));
  t.series = parse_trace(read_file(path));
  if (t.series.empty()) throw DataError("trace contains no samples");
  return t;
}

// ---------------------------------------------------------------- configs

EstimatorConfig RunConfig::resolved_estimator(double sample_period) const {
  EstimatorConfig c = estimator;
  c.sample_period = sample_period;
  if (window_seconds) {
    c.window_length = static_cast<Eigen::Index>(std::llround(*window_seconds / sample_period));
  }
  if (ttest_group_seconds) {
    c.ttest.group_size = static_cast<int>(std::llround(*ttest_group_seconds / sample_period));
  }
  c.validate();
  return c;
}

RunConfig parse_run_config(const KeyValues& kv) {
  kv.require_known({"window_length", "window_seconds", "f_min_hz", "f_max_hz", "grid_step_hz",
                    "ttest_group_size", "ttest_group_seconds", "ttest_epsilon_db", "ttest_gamma",
                    "hop_s", "median_span_s", "pixel_width_m", "pixel_variance",
                    "correlation_distance_m", "ellipse_lambda_m", "grid_padding_m", "method",
                    "localization_method", "rates_out", "locations_out", "image_dir"});
  RunConfig c;
  auto& e = c.estimator;
  e.window_length = static_cast<Eigen::Index>(kv.get_int("window_length", e.window_length));
  c.window_seconds = kv.get_double("window_seconds");
  e.grid.f_min = kv.get_double("f_min_hz", e.grid.f_min);
  e.grid.f_max = kv.get_double("f_max_hz", e.grid.f_max);
  e.grid.step = kv.get_double("grid_step_hz", e.grid.step);
  e.ttest.group_size = static_cast<int>(kv.get_int("ttest_group_size", e.ttest.group_size));
  c.ttest_group_seconds = kv.get_double("ttest_group_seconds");
  e.ttest.epsilon = kv.get_double("ttest_epsilon_db", e.ttest.epsilon);
  e.ttest.gamma = kv.get_double("ttest_gamma", e.ttest.gamma);
  e.hop_seconds = kv.get_double("hop_s", e.hop_seconds);
  e.median_span_seconds = kv.get_double("median_span_s", e.median_span_seconds);

  auto& im = c.imaging;
  im.pixel_width = kv.get_double("pixel_width_m", im.pixel_width);
  im.pixel_variance = kv.get_double("pixel_variance", im.pixel_variance);
  im.correlation_distance = kv.get_double("correlation_distance_m", im.correlation_distance);
  im.ellipse_lambda = kv.get_double("ellipse_lambda_m", im.ellipse_lambda);
  im.grid_padding = kv.get_double("grid_padding_m", im.grid_padding);
  im.validate();

  if (const auto m = kv.get("method")) c.method = parse_method(*m);
  if (const auto m = kv.get("localization_method")) c.localization_method = parse_method(*m);
  if (const auto p = kv.get("rates_out")) c.rates_out = *p;
  if (const auto p = kv.get("locations_out")) c.locations_out = *p;
  if (const auto p = kv.get("image_dir")) c.image_dir = *p;

  // Nyquist is checked once the trace's sampling period is known.
  e.grid.validate(1e-12);
  e.ttest.validate();
  if (e.window_length < 2) throw InvalidConfiguration("window_length must be at least 2");
  if (!(e.hop_seconds > 0)) throw InvalidConfiguration("hop_s must be positive");
  return c;
}

RunConfig load_run_config(const fs::path& path) { return parse_run_config(KeyValues::load(path)); }

KeyValues to_key_values(const RunConfig& c) {
  KeyValues kv;
  const auto& e = c.estimator;
  kv.set("window_length", std::to_string(e.window_length));
  if (c.window_seconds) kv.set("window_seconds", shortest(*c.window_seconds));
  kv.set("f_min_hz", shortest(e.grid.f_min));
  kv.set("f_max_hz", shortest(e.grid.f_max));
  kv.set("grid_step_hz", shortest(e.grid.step));
  kv.set("ttest_group_size", std::to_string(e.ttest.group_size));
  if (c.ttest_group_seconds) kv.set("ttest_group_seconds", shortest(*c.ttest_group_seconds));
  kv.set("ttest_epsilon_db", shortest(e.ttest.epsilon));
  kv.set("ttest_gamma", shortest(e.ttest.gamma));
  kv.set("hop_s", shortest(e.hop_seconds));
  kv.set("median_span_s", shortest(e.median_span_seconds));
  kv.set("pixel_width_m", shortest(c.imaging.pixel_width));
  kv.set("pixel_variance", shortest(c.imaging.pixel_variance));
  kv.set("correlation_distance_m", shortest(c.imaging.correlation_distance));
  kv.set("ellipse_lambda_m", shortest(c.imaging.ellipse_lambda));
  kv.set("grid_padding_m", shortest(c.imaging.grid_padding));
  kv.set("method", std::string(to_string(c.method)));
  kv.set("localization_method", std::string(to_string(c.localization_method)));
  if (c.rates_out) kv.set("rates_out", c.rates_out->string());
  if (c.locations_out) kv.set("locations_out", c.locations_out->string());
  if (c.image_dir) kv.set("image_dir", c.image_dir->string());
  return kv;
}

ScenarioConfig parse_scenario(const KeyValues& kv, const fs::path& base_dir) {
  kv.require_known({"layout", "nodes_file", "channels", "sample_period_s", "duration_s",
                    "person_x_m", "person_y_m", "rate_bpm", "amplitude_db", "noise_sigma_db",
                    "baseline_mean_db", "baseline_spread_db", "quantize", "missing_probability",
                    "ellipse_lambda_m", "sensitivity_decay_m", "sensitive_links",
                    "transient_step_db", "seed", "motion_per_minute", "motion_link_fraction",
                    "motion_step_db", "motion_transient_s", "motion_events"});

  const double duration = kv.get_double("duration_s", 300.0);
  const auto seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
  const std::string layout = kv.get("layout").value_or("nap");

  ScenarioConfig c;
  if (layout == "nap") {
    c = nap_scenario(duration, seed);
  } else if (layout == "apartment") {
    c = apartment_scenario(duration, seed);
  } else if (layout == "custom") {
    const auto file = kv.get("nodes_file");
    if (!file) throw InvalidConfiguration("layout=custom needs nodes_file");
    fs::path p = *file;
    if (p.is_relative()) p = base_dir / p;
    try {
      c.nodes = parse_nodes(read_file(p));
    } catch (const DataError& e) {
      throw InvalidConfiguration(e.what());
    }
    c.duration_s = duration;
    c.seed = seed;
  } else {
    throw InvalidConfiguration("unknown layout '" + layout + "'");
  }

  c.channels = static_cast<int>(kv.get_int("channels", c.channels));
  c.sample_period = kv.get_double("sample_period_s", c.sample_period);
  c.person.position.x() = kv.get_double("person_x_m", c.person.position.x());
  c.person.position.y() = kv.get_double("person_y_m", c.person.position.y());
  c.person.rate_bpm = kv.get_double("rate_bpm", c.person.rate_bpm);
  c.person.amplitude_db = kv.get_double("amplitude_db", c.person.amplitude_db);
  c.noise_sigma_db = kv.get_double("noise_sigma_db", c.noise_sigma_db);
  c.baseline_mean_db = kv.get_double("baseline_mean_db", c.baseline_mean_db);
  c.baseline_spread_db = kv.get_double("baseline_spread_db", c.baseline_spread_db);
  c.quantize = kv.get_bool("quantize", c.quantize);
  c.missing_probability = kv.get_double("missing_probability", c.missing_probability);
  c.ellipse_lambda = kv.get_double("ellipse_lambda_m", c.ellipse_lambda);
  c.sensitivity_decay = kv.get_double("sensitivity_decay_m", c.sensitivity_decay);
  c.sensitive_links = static_cast<int>(kv.get_int("sensitive_links", c.sensitive_links));
  c.transient_step_db = kv.get_double("transient_step_db", c.transient_step_db);

  if (const auto per_minute = kv.get_double("motion_per_minute")) {
    c.motion_events.clear();
    if (*per_minute > 0) {
      c.motion_events = periodic_motion(duration, *per_minute, kv.get_double("motion_link_fraction", 0.2),
                                        kv.get_double("motion_step_db", 6.0),
                                        kv.get_double("motion_transient_s", 0.0), seed);
    }
  }
  if (const auto events = kv.get("motion_events")) {
    c.motion_events.clear();
    for (auto item : split(*events, ';')) {
      if (trim(item).empty()) continue;
      const auto f = split(item, ':');
      if (f.size() != 4) throw InvalidConfiguration("motion_events entries are time:fraction:step:transient");
      try {
        c.motion_events.push_back({to_double(f[0], "time"), to_double(f[1], "fraction"),
                                   to_double(f[2], "step"), to_double(f[3], "transient")});
      } catch (const DataError& e) {
        throw InvalidConfiguration(e.what());
      }
    }
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------- outputs

std::string format_rates(std::span<const RateRow> rows) {
  std::string out(kRatesHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += fixed(r.time_s, 3) + "," + fixed(r.bpm, 2) + "," + (r.motion ? "1" : "0") + "," +
           fixed(r.median_bpm, 2) + "\n";
  }
  return out;
}

std::vector<RateRow> parse_rates(std::string_view text) {
  std::vector<RateRow> rows;
  for_each_row(text, kRatesHeader, [&](std::string_view line, std::size_t line_no) {
    const auto f = split(line, ',');
    if (f.size() != 4) throw DataError("expected 4 fields on rates line " + std::to_string(line_no));
    rows.push_back({to_double(f[0], "time"), to_double(f[1], "f_hat_bpm"),
                    to_int(f[2], "motion_flag") != 0, to_double(f[3], "median_bpm")});
  });
  return rows;
}

std::string format_locations(std::span<const LocationRow> rows) {
  std::string out(kLocationsHeader);
  out += '\n';
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (const auto& r : rows) {
    out += fixed(r.time_s, 3) + "," + fixed(r.location.x(), 2) + "," + fixed(r.location.y(), 2) +
           "," + shortest(r.max_pixel) + "," + (r.degenerate ? "1" : "0") + "\n";
    sum += r.location;
  }
  if (!rows.empty()) {
    const Eigen::Vector2d mean = sum / static_cast<double>(rows.size());
    out += "mean," + fixed(mean.x(), 2) + "," + fixed(mean.y(), 2) + ",,\n";
  }
  return out;
}

std::vector<LocationRow> parse_locations(std::string_view text) {
  std::vector<LocationRow> rows;
  for_each_row(text, kLocationsHeader, [&](std::string_view line, std::size_t line_no) {
    const auto f = split(line, ',');
    if (f.size() != 5) throw DataError("expected 5 fields on locations line " + std::to_string(line_no));
    if (trim(f[0]) == "mean") return;
    rows.push_back({to_double(f[0], "time"),
                    {to_double(f[1], "x_m"), to_double(f[2], "y_m")},
                    to_double(f[3], "max_pixel_value"),
                    to_int(f[4], "degenerate") != 0});
  });
  return rows;
}

std::string format_image(const Eigen::VectorXd& values, const PixelGrid& grid) {
  if (values.size() != grid.size()) throw DimensionMismatch("image size differs from grid");
  std::string out;
  char buf[32];
  for (Eigen::Index iy = 0; iy < grid.ny(); ++iy) {
    for (Eigen::Index ix = 0; ix < grid.nx(); ++ix) {
      std::snprintf(buf, sizeof buf, "%.6g", values[iy * grid.nx() + ix]);
      if (ix) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace breathfind::io
