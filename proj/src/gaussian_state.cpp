#include "spinsense/gaussian_state.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace spinsense {

namespace {

constexpr double kResidualTolerance = 1e-10;
constexpr double kWitnessMargin = 1e-9;

using Matrix16d = Eigen::Matrix<double, 16, 16>;
using Vector16d = Eigen::Matrix<double, 16, 1>;

Matrix4d unvec(const Vector16d& x) { return Eigen::Map<const Matrix4d>(x.data()); }

Vector16d vec(const Matrix4d& m) { return Eigen::Map<const Vector16d>(m.data()); }

}  // namespace

double lyapunov_residual(const LinearModel& model, const Matrix4d& v) {
  const Matrix4d r = model.drift * v + v * model.drift.transpose() + model.diffusion;
  const double scale = model.diffusion.norm();
  return scale > 0.0 ? r.norm() / scale : r.norm();
}

Covariance solve_lyapunov(const LinearModel& model) {
  require_stable(model);

  // vec(A V + V A^T) = (I kron A + A kron I) vec(V) in column-major order.
  const Matrix4d& a = model.drift;
  Matrix16d k = Matrix16d::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      k.block<4, 4>(4 * i, 4 * i) += (i == j ? 1.0 : 0.0) * a;
      k.block<4, 4>(4 * i, 4 * j) += a(i, j) * Matrix4d::Identity();
    }

  const Vector16d rhs = -vec(model.diffusion);
  Eigen::FullPivLU<Matrix16d> lu(k);
  Vector16d x = lu.solve(rhs);
  // One step of iterative refinement.
  x += lu.solve(rhs - k * x);

  Covariance c;
  const Matrix4d raw = unvec(x);
  c.v = 0.5 * (raw + raw.transpose());
  c.relative_residual = lyapunov_residual(model, c.v);
  if (!(c.relative_residual <= kResidualTolerance)) {
    std::ostringstream os;
    os << "Lyapunov solve residual " << c.relative_residual << " exceeds " << kResidualTolerance;
    throw Error(os.str());
  }
  return c;
}

double uncertainty_margin(const Matrix4d& v) {
  Eigen::Matrix4cd h = v.cast<std::complex<double>>();
  const std::complex<double> half_i(0.0, 0.5);
  for (int mode = 0; mode < 2; ++mode) {
    const int q = 2 * mode;
    h(q, q + 1) += half_i;
    h(q + 1, q) -= half_i;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::pair<int, int> pair_indices(QuadraturePair pair) {
  switch (pair) {
    case QuadraturePair::kOptical: return {kOptQ, kOptP};
    case QuadraturePair::kMechanical: return {kMechQ, kMechP};
    case QuadraturePair::kCross: return {kOptQ, kMechQ};
  }
  return {kOptQ, kOptP};
}

WignerProjection wigner_projection(const Matrix4d& v, QuadraturePair pair) {
  const auto [i, j] = pair_indices(pair);
  WignerProjection w;
  w.v << v(i, i), v(i, j), v(j, i), v(j, j);
  w.v = 0.5 * (w.v + w.v.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(w.v);
  const Eigen::Vector2d lambda = es.eigenvalues();  // ascending
  if (!(lambda(0) > 0.0)) throw Error("reduced covariance is not positive definite");
  w.minor_axis = std::sqrt(2.0 * lambda(0));
  w.major_axis = std::sqrt(2.0 * lambda(1));
  const Eigen::Vector2d minor = es.eigenvectors().col(0);
  double angle = std::atan2(minor(1), minor(0));
  if (angle < 0.0) angle += constants::kPi;
  if (angle >= constants::kPi) angle -= constants::kPi;
  w.angle = angle;
  return w;
}

double wigner_density(const Eigen::Matrix2d& v, const Eigen::Vector2d& x) {
  const double det = v.determinant();
  if (!(det > 0.0)) throw Error("covariance is not positive definite");
  return std::exp(-0.5 * x.dot(v.inverse() * x)) / (constants::kTwoPi * std::sqrt(det));
}

double wigner_density(const Matrix4d& v, const Vector4d& x) {
  Eigen::LLT<Matrix4d> llt(v);
  if (llt.info() != Eigen::Success) throw Error("covariance is not positive definite");
  const Vector4d y = llt.matrixL().solve(x);
  const double sqrt_det = llt.matrixL().toDenseMatrix().diagonal().prod();
  return std::exp(-0.5 * y.squaredNorm()) / (constants::kTwoPi * constants::kTwoPi * sqrt_det);
}

SqueezingWitness quadrature_squeezing_witness(const Matrix4d& v) {
  const Eigen::Matrix2d block = v.topLeftCorner<2, 2>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(block, Eigen::EigenvaluesOnly);
  SqueezingWitness w;
  w.min_variance = es.eigenvalues()(0);
  w.squeezed = w.min_variance < kVacuumVariance - kWitnessMargin;
  return w;
}

}  // namespace spinsense
