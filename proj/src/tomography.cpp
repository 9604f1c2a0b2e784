#include "breathfind/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include <Eigen/Cholesky>

namespace breathfind {

PixelGrid::PixelGrid(Eigen::Vector2d origin, double pixel_width, Eigen::Index nx, Eigen::Index ny)
    : origin_(std::move(origin)), pixel_width_(pixel_width), nx_(nx), ny_(ny) {
  if (!(pixel_width_ > 0)) throw InvalidConfiguration("pixel width must be positive");
  if (nx_ < 1 || ny_ < 1) throw InvalidConfiguration("pixel grid must have at least one pixel");
  if (!origin_.allFinite()) throw InvalidConfiguration("non-finite grid origin");
}

PixelGrid PixelGrid::covering(const Eigen::Vector2d& lower, const Eigen::Vector2d& upper,
                              double pixel_width) {
  if (!(pixel_width > 0)) throw InvalidConfiguration("pixel width must be positive");
  const Eigen::Vector2d extent = upper - lower;
  if ((extent.array() < 0).any()) throw InvalidConfiguration("grid upper corner below lower corner");
  auto count = [&](double len) {
    return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(len / pixel_width - 1e-9)));
  };
  return PixelGrid(lower, pixel_width, count(extent.x()), count(extent.y()));
}

PixelGrid PixelGrid::around_nodes(std::span<const NodeGeometry> nodes, double pixel_width,
                                  double padding) {
  if (nodes.empty()) throw InvalidConfiguration("no nodes to bound the pixel grid");
  if (padding < 0) throw InvalidConfiguration("grid padding must be non-negative");
  Eigen::Vector2d lower = nodes.front().position;
  Eigen::Vector2d upper = nodes.front().position;
  for (const auto& node : nodes) {
    lower = lower.cwiseMin(node.position);
    upper = upper.cwiseMax(node.position);
  }
  const Eigen::Vector2d pad = Eigen::Vector2d::Constant(padding);
  return covering(lower - pad, upper + pad, pixel_width);
}

Eigen::Vector2d PixelGrid::center(Eigen::Index k) const {
  const Eigen::Index ix = k % nx_;
  const Eigen::Index iy = k / nx_;
  return origin_ + pixel_width_ * Eigen::Vector2d(static_cast<double>(ix) + 0.5,
                                                  static_cast<double>(iy) + 0.5);
}

Eigen::Matrix2Xd PixelGrid::centers() const {
  Eigen::Matrix2Xd c(2, size());
  for (Eigen::Index k = 0; k < size(); ++k) c.col(k) = center(k);
  return c;
}

void ImagingParams::validate() const {
  if (!(pixel_width > 0)) throw InvalidConfiguration("pixel width must be positive");
  if (!(pixel_variance > 0)) throw InvalidConfiguration("pixel variance must be positive");
  if (!(correlation_distance > 0)) throw InvalidConfiguration("correlation distance must be positive");
  if (!(ellipse_lambda > 0)) throw InvalidConfiguration("ellipse size parameter must be positive");
  if (!(grid_padding >= 0)) throw InvalidConfiguration("grid padding must be non-negative");
}

WeightMatrix build_weights(std::span<const NodeGeometry> nodes, std::span<const LinkKey> links,
                           const PixelGrid& grid, double ellipse_lambda) {
  if (!(ellipse_lambda > 0)) throw InvalidConfiguration("ellipse size parameter must be positive");
  validate_nodes(nodes);
  std::map<NodeId, Eigen::Vector2d> position;
  for (const auto& node : nodes) position[node.node_id] = node.position;

  const Eigen::Matrix2Xd centers = grid.centers();
  WeightMatrix w;
  w.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(links.size()), grid.size());

  // Ellipses depend only on the unordered endpoint pair.
  std::map<std::pair<NodeId, NodeId>, Eigen::RowVectorXd> rows;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const LinkKey& link = links[i];
    const auto tx = position.find(link.tx);
    const auto rx = position.find(link.rx);
    if (tx == position.end() || rx == position.end()) {
      throw DataError("missing coordinates for link endpoint");
    }
    const auto key = std::minmax(link.tx, link.rx);
    auto cached = rows.find(key);
    if (cached == rows.end()) {
      const double bound = (tx->second - rx->second).norm() + ellipse_lambda;
      const Eigen::ArrayXd path = (centers.colwise() - tx->second).colwise().norm().array() +
                                  (centers.colwise() - rx->second).colwise().norm().array();
      const Eigen::ArrayXd inside = (path <= bound).cast<double>();
      const double count = inside.sum();
      Eigen::RowVectorXd row = count > 0 ? Eigen::RowVectorXd(inside.transpose() / count)
                                         : Eigen::RowVectorXd::Zero(grid.size());
      cached = rows.emplace(key, std::move(row)).first;
    }
    const auto r = static_cast<Eigen::Index>(i);
    w.matrix.row(r) = cached->second;
    if ((cached->second.array() == 0).all()) w.empty_rows.push_back(r);
  }
  return w;
}

Eigen::MatrixXd build_covariance(const PixelGrid& grid, double variance,
                                 double correlation_distance) {
  if (!(variance > 0)) throw InvalidConfiguration("pixel variance must be positive");
  if (!(correlation_distance > 0)) throw InvalidConfiguration("correlation distance must be positive");
  const Eigen::Matrix2Xd c = grid.centers();
  const Eigen::Index p = grid.size();
  Eigen::MatrixXd g(p, p);
  for (Eigen::Index m = 0; m < p; ++m) {
    for (Eigen::Index k = m; k < p; ++k) {
      const double value = variance * std::exp(-(c.col(k) - c.col(m)).norm() / correlation_distance);
      g(k, m) = value;
      g(m, k) = value;
    }
  }
  return g;
}

namespace {

Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& g) {
  const Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("covariance matrix is not positive definite");
  }
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()));
  return 0.5 * (inv + inv.transpose());
}

// W^T W + G^-1, full symmetric storage.
Eigen::MatrixXd normal_matrix(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != covariance.cols()) throw DimensionMismatch("covariance must be square");
  if (weights.cols() != covariance.rows()) {
    throw DimensionMismatch("weight matrix columns differ from pixel count");
  }
  Eigen::MatrixXd a = inverse_spd(covariance);
  a.selfadjointView<Eigen::Lower>().rankUpdate(weights.transpose());
  a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
  return a;
}

double relative_residual(const Eigen::MatrixXd& normal, const Eigen::MatrixXd& weights,
                         const Eigen::MatrixXd& projection) {
  const double scale = weights.norm();
  const double residual = (normal * projection - weights.transpose()).norm();
  return scale > 0 ? residual / scale : residual;
}

}  // namespace

Eigen::MatrixXd build_projection(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& covariance) {
  const Eigen::MatrixXd normal = normal_matrix(weights, covariance);
  const Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) {
    const Eigen::VectorXd d = normal.diagonal();
    std::ostringstream msg;
    msg << "regularized normal matrix is not positive definite (diagonal range " << d.minCoeff()
        << " .. " << d.maxCoeff() << ")";
    throw NumericalError(msg.str());
  }
  Eigen::MatrixXd projection = llt.solve(weights.transpose());

  const double residual = relative_residual(normal, weights, projection);
  if (!(residual <= 1e-6)) {
    std::ostringstream msg;
    msg << "projection residual " << residual << " exceeds 1e-6; reciprocal condition estimate "
        << llt.rcond();
    throw NumericalError(msg.str());
  }
  return projection;
}

double projection_residual(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& covariance,
                           const Eigen::MatrixXd& projection) {
  return relative_residual(normal_matrix(weights, covariance), weights, projection);
}

BreathingImage estimate_image(const Eigen::MatrixXd& projection, const Eigen::VectorXd& link_psd,
                              const PixelGrid& grid) {
  if (projection.cols() != link_psd.size()) {
    throw DimensionMismatch("PSD vector length differs from the projection's link count");
  }
  if (projection.rows() != grid.size()) {
    throw DimensionMismatch("projection rows differ from the pixel count");
  }
  if (!link_psd.allFinite() || (link_psd.array() < 0).any()) {
    throw DataError("link PSD values must be finite and non-negative");
  }

  BreathingImage img;
  img.values = projection * link_psd;
  img.degenerate = (img.values.array() == 0.0).all();
  img.peak = 0;
  for (Eigen::Index k = 1; k < img.values.size(); ++k) {
    if (img.values[k] > img.values[img.peak]) img.peak = k;
  }
  img.location = grid.center(img.peak);
  return img;
}

ImagingModel::ImagingModel(std::span<const NodeGeometry> nodes, std::vector<LinkKey> links,
                           const ImagingParams& params)
    : ImagingModel(nodes, std::move(links), params,
                   PixelGrid::around_nodes(nodes, params.pixel_width, params.grid_padding)) {}

ImagingModel::ImagingModel(std::span<const NodeGeometry> nodes, std::vector<LinkKey> links,
                           const ImagingParams& params, PixelGrid grid)
    : grid_(std::move(grid)), links_(std::move(links)), params_(params) {
  params_.validate();
  if (links_.empty()) throw InvalidConfiguration("imaging model needs at least one link");
  weights_ = build_weights(nodes, links_, grid_, params_.ellipse_lambda);
  covariance_ = build_covariance(grid_, params_.pixel_variance, params_.correlation_distance);
  projection_ = build_projection(weights_.matrix, covariance_);
}

BreathingImage ImagingModel::image(const Eigen::VectorXd& link_psd) const {
  return estimate_image(projection_, link_psd, grid_);
}

BreathingImage ImagingModel::image(std::span<const LinkKey> links,
                                   const Eigen::VectorXd& link_psd) const {
  if (static_cast<Eigen::Index>(links.size()) != link_psd.size()) {
    throw DimensionMismatch("link list and PSD vector differ in length");
  }
  Eigen::VectorXd aligned = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(links_.size()));
  // Both lists are usually in the same order; walk them together and fall
  // back to a search when they diverge.
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (cursor < links_.size() && links_[cursor] == links[i]) {
      aligned[static_cast<Eigen::Index>(cursor++)] = link_psd[static_cast<Eigen::Index>(i)];
      continue;
    }
    const auto it = std::find(links_.begin(), links_.end(), links[i]);
    if (it == links_.end()) continue;
    cursor = static_cast<std::size_t>(it - links_.begin());
    aligned[static_cast<Eigen::Index>(cursor++)] = link_psd[static_cast<Eigen::Index>(i)];
  }
  return image(aligned);
}

}  // namespace breathfind
