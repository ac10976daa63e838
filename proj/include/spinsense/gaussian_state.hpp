#pragma once

#include "spinsense/core_model.hpp"

namespace spinsense {

/// Symmetrized covariance V_ij = <{dx_i, dx_j}>/2 of the stationary state.
struct Covariance {
  Matrix4d v;
  double relative_residual = 0.0;  // ||A V + V A^T + D||_F / ||D||_F
};

/// Solves A V + V A^T + D = 0 for a strictly stable model.
/// Throws InstabilityError when unstable and Error when the residual check fails.
Covariance solve_lyapunov(const LinearModel& model);

double lyapunov_residual(const LinearModel& model, const Matrix4d& v);

/// Smallest eigenvalue of V + i Sigma / 2, where Sigma is the symplectic
/// form. Non-negative for a physical state.
double uncertainty_margin(const Matrix4d& v);

enum class QuadraturePair { kOptical, kMechanical, kCross };

/// Indices of the pair: (dq, dp), (dq_m, dp_m) or (dq, dq_m).
std::pair<int, int> pair_indices(QuadraturePair pair);

/// Reduced two-mode marginal and the 1/e contour of its Wigner function.
struct WignerProjection {
  Eigen::Matrix2d v;
  double major_axis = 0.0;  // semi-axis sqrt(2 lambda_max)
  double minor_axis = 0.0;  // semi-axis sqrt(2 lambda_min)
  double angle = 0.0;       // orientation of the minor (squeezed) axis in [0, pi)
};

WignerProjection wigner_projection(const Matrix4d& v, QuadraturePair pair);

/// Normalized zero-mean Gaussian Wigner function of a 2x2 marginal.
double wigner_density(const Eigen::Matrix2d& v, const Eigen::Vector2d& x);

/// Normalized zero-mean Gaussian Wigner function of the full state.
double wigner_density(const Matrix4d& v, const Vector4d& x);

struct SqueezingWitness {
  double min_variance = 0.0;  // smallest eigenvalue of the optical 2x2 block
  bool squeezed = false;      // min_variance < 1/2 - 1e-9
};

SqueezingWitness quadrature_squeezing_witness(const Matrix4d& v);

}  // namespace spinsense
