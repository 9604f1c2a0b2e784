#pragma once

// Breathing imaging: an ellipse weight model W relating pixel breathing
// energy to per-link PSD, an exponential spatial prior G, and the
// regularized inverse Pi = (W^T W + G^-1)^-1 W^T applied as x = Pi v.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "breathfind/core.hpp"

namespace breathfind {

/// Regular lattice of square pixels covering a rectangle. Pixel k sits at
/// column k % nx and row k / nx (row-major, rows increasing in y).
class PixelGrid {
 public:
  PixelGrid(Eigen::Vector2d origin, double pixel_width, Eigen::Index nx, Eigen::Index ny);

  /// Smallest lattice with the given pixel width whose pixels cover
  /// [lower, upper].
  static PixelGrid covering(const Eigen::Vector2d& lower, const Eigen::Vector2d& upper,
                            double pixel_width);
  /// Bounding box of the nodes, padded by `padding` meters on every side.
  static PixelGrid around_nodes(std::span<const NodeGeometry> nodes, double pixel_width,
                                double padding);

  const Eigen::Vector2d& origin() const { return origin_; }
  double pixel_width() const { return pixel_width_; }
  Eigen::Index nx() const { return nx_; }
  Eigen::Index ny() const { return ny_; }
  Eigen::Index size() const { return nx_ * ny_; }

  Eigen::Vector2d center(Eigen::Index k) const;
  /// 2 x P matrix of pixel centers.
  Eigen::Matrix2Xd centers() const;

 private:
  Eigen::Vector2d origin_;
  double pixel_width_;
  Eigen::Index nx_;
  Eigen::Index ny_;
};

struct ImagingParams {
  double pixel_width = 0.2;           // m
  double pixel_variance = 2.0;        // sigma_x^2
  double correlation_distance = 2.0;  // m
  double ellipse_lambda = 1.0;        // m, excess path length
  double grid_padding = 0.5;          // m around the node bounding box

  void validate() const;
};

struct WeightMatrix {
  Eigen::MatrixXd matrix;  // links x pixels
  /// Rows whose ellipse contains no pixel centre; left all-zero.
  std::vector<Eigen::Index> empty_rows;
};

/// W(l,k) = 1/P_l when ||z_tx - p_k|| + ||z_rx - p_k|| <= ||z_tx - z_rx|| + lambda,
/// otherwise 0, where P_l counts the pixels inside link l's ellipse.
WeightMatrix build_weights(std::span<const NodeGeometry> nodes, std::span<const LinkKey> links,
                           const PixelGrid& grid, double ellipse_lambda);

/// G(k,m) = variance * exp(-||p_k - p_m|| / correlation_distance).
Eigen::MatrixXd build_covariance(const PixelGrid& grid, double variance,
                                 double correlation_distance);

/// Solves (W^T W + G^-1) Pi = W^T through Cholesky factorizations. Throws
/// NumericalError when a factorization fails or when the relative Frobenius
/// residual exceeds 1e-6.
Eigen::MatrixXd build_projection(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& covariance);

/// ||(W^T W + G^-1) Pi - W^T||_F / ||W^T||_F (0 when W is zero and Pi is too).
double projection_residual(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& covariance,
                           const Eigen::MatrixXd& projection);

struct BreathingImage {
  Eigen::VectorXd values;  // x, one entry per pixel
  Eigen::Index peak = 0;   // argmax pixel, lowest index on ties
  Eigen::Vector2d location = Eigen::Vector2d::Zero();
  bool degenerate = false;  // image identically zero

  double peak_value() const { return values.size() ? values[peak] : 0.0; }
};

BreathingImage estimate_image(const Eigen::MatrixXd& projection, const Eigen::VectorXd& link_psd,
                              const PixelGrid& grid);

/// W, G and Pi for a fixed deployment, built once and shared read-only.
class ImagingModel {
 public:
  ImagingModel(std::span<const NodeGeometry> nodes, std::vector<LinkKey> links,
               const ImagingParams& params);
  ImagingModel(std::span<const NodeGeometry> nodes, std::vector<LinkKey> links,
               const ImagingParams& params, PixelGrid grid);

  const PixelGrid& grid() const { return grid_; }
  const std::vector<LinkKey>& links() const { return links_; }
  const ImagingParams& params() const { return params_; }
  const WeightMatrix& weights() const { return weights_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::MatrixXd& projection() const { return projection_; }

  /// Image from a PSD vector in model link order.
  BreathingImage image(const Eigen::VectorXd& link_psd) const;

  /// Image from PSD values for an arbitrary link list. Model links absent
  /// from `links` contribute zero; links unknown to the model are ignored.
  BreathingImage image(std::span<const LinkKey> links, const Eigen::VectorXd& link_psd) const;

 private:
  PixelGrid grid_;
  std::vector<LinkKey> links_;
  ImagingParams params_;
  WeightMatrix weights_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd projection_;
};

}  // namespace breathfind
