#pragma once

// Domain types shared by every stage of the pipeline: node placement,
// logical links, uniformly sampled RSS series and aligned analysis windows.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "breathfind/error.hpp"

namespace breathfind {

using NodeId = int;
using SampleIndex = std::int64_t;

struct NodeGeometry {
  NodeId node_id = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // meters
};

/// Throws InvalidConfiguration on duplicate ids or non-finite coordinates.
void validate_nodes(std::span<const NodeGeometry> nodes);

/// One logical link: a transmitter, a receiver and a frequency channel.
struct LinkKey {
  NodeId tx = 0;
  NodeId rx = 1;
  int channel = 0;

  friend auto operator<=>(const LinkKey&, const LinkKey&) = default;
};

/// Orders links channel-major, then by transmitter, then by receiver.
struct ChannelMajorLess {
  bool operator()(const LinkKey& a, const LinkKey& b) const {
    if (a.channel != b.channel) return a.channel < b.channel;
    if (a.tx != b.tx) return a.tx < b.tx;
    return a.rx < b.rx;
  }
};

/// All C*S*(S-1) links of a fully connected network of `node_count` nodes
/// (ids 0..S-1) on `channel_count` channels, in channel-major order.
std::vector<LinkKey> enumerate_links(int node_count, int channel_count);

/// RSS samples of one link at uniform period T. Sample n is taken at time
/// n*T. Missing samples are stored as quiet NaN.
class RssSeries {
 public:
  RssSeries() = default;
  RssSeries(LinkKey link, Eigen::VectorXd samples);

  const LinkKey& link() const { return link_; }
  const Eigen::VectorXd& samples() const { return samples_; }
  SampleIndex size() const { return samples_.size(); }

  /// Indices past the end of the series count as missing.
  bool missing(SampleIndex n) const;
  Eigen::Array<bool, Eigen::Dynamic, 1> missing_mask() const;

  static double missing_value();

 private:
  LinkKey link_;
  Eigen::VectorXd samples_;
};

/// N aligned samples (indices start..start+N-1) for every link that had
/// enough data in that range. Row r of `samples` belongs to `links[r]`.
struct RssFrame {
  SampleIndex start = 0;
  std::vector<LinkKey> links;
  Eigen::MatrixXd samples;  // links x N, gap-filled

  Eigen::Index length() const { return samples.cols(); }
  Eigen::Index link_count() const { return samples.rows(); }
  SampleIndex end() const { return start + samples.cols() - 1; }
};

/// Extracts the window ending at `end_index` of length `length`.
///
/// Links with fewer than length/2 present samples in the window are left
/// out. Gaps in retained links are filled with the most recent preceding
/// present sample of the series (which may lie before the window); a gap
/// with no preceding sample takes the first present sample after it.
/// Throws EmptyFrameError when no link qualifies and InvalidConfiguration
/// when length < 2 or the window would start before index 0.
RssFrame extract_frame(std::span<const RssSeries> series, SampleIndex end_index,
                       Eigen::Index length);

}  // namespace breathfind
