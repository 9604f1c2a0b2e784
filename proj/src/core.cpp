#include "breathfind/core.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace breathfind {

void validate_nodes(std::span<const NodeGeometry> nodes) {
  std::set<NodeId> seen;
  for (const auto& node : nodes) {
    if (!seen.insert(node.node_id).second) {
      throw InvalidConfiguration("duplicate node id " + std::to_string(node.node_id));
    }
    if (!node.position.allFinite()) {
      throw InvalidConfiguration("non-finite coordinate for node " +
                                 std::to_string(node.node_id));
    }
  }
}

std::vector<LinkKey> enumerate_links(int node_count, int channel_count) {
  if (node_count < 2) throw InvalidConfiguration("at least two nodes are required");
  if (channel_count < 1) throw InvalidConfiguration("at least one channel is required");

  std::vector<LinkKey> links;
  links.reserve(static_cast<std::size_t>(channel_count) * node_count * (node_count - 1));
  for (int c = 0; c < channel_count; ++c) {
    for (NodeId tx = 0; tx < node_count; ++tx) {
      for (NodeId rx = 0; rx < node_count; ++rx) {
        if (tx != rx) links.push_back({tx, rx, c});
      }
    }
  }
  return links;
}

RssSeries::RssSeries(LinkKey link, Eigen::VectorXd samples)
    : link_(link), samples_(std::move(samples)) {
  if (link_.tx == link_.rx) throw InvalidConfiguration("link transmitter equals receiver");
  if (link_.channel < 0) throw InvalidConfiguration("negative channel index");
  for (Eigen::Index n = 0; n < samples_.size(); ++n) {
    if (std::isinf(samples_[n])) throw DataError("infinite RSS sample");
  }
}

double RssSeries::missing_value() { return std::numeric_limits<double>::quiet_NaN(); }

bool RssSeries::missing(SampleIndex n) const {
  return n < 0 || n >= samples_.size() || std::isnan(samples_[n]);
}

Eigen::Array<bool, Eigen::Dynamic, 1> RssSeries::missing_mask() const {
  return samples_.array().isNaN();
}

RssFrame extract_frame(std::span<const RssSeries> series, SampleIndex end_index,
                       Eigen::Index length) {
  if (length < 2) throw InvalidConfiguration("frame length must be at least 2");
  const SampleIndex start = end_index - length + 1;
  if (start < 0) throw InvalidConfiguration("window starts before the first sample");

  RssFrame frame;
  frame.start = start;
  std::vector<Eigen::VectorXd> rows;

  for (const auto& s : series) {
    Eigen::Index present = 0;
    for (SampleIndex n = start; n <= end_index; ++n) {
      if (!s.missing(n)) ++present;
    }
    if (2 * present < length) continue;

    Eigen::VectorXd row(length);
    // Seed carry-forward with the last present sample before the window.
    double carry = RssSeries::missing_value();
    for (SampleIndex n = std::min<SampleIndex>(start, s.size()) - 1; n >= 0; --n) {
      if (!s.missing(n)) {
        carry = s.samples()[n];
        break;
      }
    }
    if (std::isnan(carry)) {
      for (SampleIndex n = start; n <= end_index; ++n) {
        if (!s.missing(n)) {
          carry = s.samples()[n];
          break;
        }
      }
    }
    for (SampleIndex n = start; n <= end_index; ++n) {
      if (!s.missing(n)) carry = s.samples()[n];
      row[n - start] = carry;
    }
    frame.links.push_back(s.link());
    rows.push_back(std::move(row));
  }

  if (rows.empty()) throw EmptyFrameError("no link has enough samples in the window");

  frame.samples.resize(static_cast<Eigen::Index>(rows.size()), length);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    frame.samples.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  }
  return frame;
}

}  // namespace breathfind
