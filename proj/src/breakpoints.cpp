#include "breathfind/breakpoints.hpp"

#include <cmath>

namespace breathfind {

void TTestParams::validate() const {
  if (group_size < 2) throw InvalidConfiguration("t-test group size must be at least 2");
  if (!(epsilon > 0)) throw InvalidConfiguration("t-test epsilon must be positive");
  if (!(gamma > 0)) throw InvalidConfiguration("t-test threshold must be positive");
}

std::vector<Eigen::Index> BreakpointSet::segment_cuts() const {
  std::vector<Eigen::Index> cuts;
  cuts.reserve(interior.size() + 1);
  cuts.push_back(0);
  for (SampleIndex b : interior) cuts.push_back(static_cast<Eigen::Index>(b - start));
  return cuts;
}

std::optional<double> rms_t_score(std::span<const std::optional<double>> scores) {
  double sum = 0;
  std::size_t count = 0;
  for (const auto& tau : scores) {
    if (!tau) continue;
    sum += *tau * *tau;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return std::sqrt(sum / static_cast<double>(count));
}

BreakpointSet detect_breakpoints(const RssFrame& frame, const TTestParams& params) {
  params.validate();
  const Eigen::Index length = frame.length();
  const Eigen::Index q = params.group_size;

  BreakpointSet result;
  result.start = frame.start;
  result.end = frame.end();
  result.rms_trace.assign(static_cast<std::size_t>(length), std::nullopt);

  if (length < 2 * q) {
    result.too_short = true;
    return result;
  }
  if (frame.link_count() == 0) return result;

  const Eigen::MatrixXd& r = frame.samples;
  const double links = static_cast<double>(frame.link_count());
  const double inv_q = 1.0 / static_cast<double>(q);
  const double inv_dof = 1.0 / static_cast<double>(q - 1);

  for (Eigen::Index n = q; n + q <= length; ++n) {
    const auto before = r.middleCols(n - q, q);
    const auto after = r.middleCols(n, q);
    const Eigen::VectorXd mean_before = before.rowwise().mean();
    const Eigen::VectorXd mean_after = after.rowwise().mean();
    const Eigen::ArrayXd var_before =
        (before.colwise() - mean_before).rowwise().squaredNorm().array() * inv_dof;
    const Eigen::ArrayXd var_after =
        (after.colwise() - mean_after).rowwise().squaredNorm().array() * inv_dof;
    const Eigen::ArrayXd denom = ((var_before + var_after) * inv_q).sqrt().max(params.epsilon);
    const Eigen::ArrayXd tau = (mean_before - mean_after).array() / denom;
    const double rms = std::sqrt(tau.square().sum() / links);

    result.rms_trace[static_cast<std::size_t>(n)] = rms;
    if (rms >= params.gamma) result.interior.push_back(frame.start + n);
  }
  return result;
}

}  // namespace breathfind
