#include "spinsense/spectra.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

namespace spinsense {

namespace {

void check_grid_bounds(double lo, double hi, std::size_t n) {
  if (!(std::isfinite(lo) && std::isfinite(hi))) throw ValidationError("grid bounds must be finite");
  if (n < 2) throw ValidationError("a frequency grid needs at least 2 points");
  if (!(hi > lo)) throw ValidationError("grid upper bound must exceed the lower bound");
}

// Homodyne row t = cos(phi) T_q + sin(phi) T_p.
Eigen::Matrix<std::complex<double>, 1, kNoiseChannels> homodyne_row(const QuadratureSpectra& s,
                                                                    double phi) {
  return std::cos(phi) * s.transfer.row(0) + std::sin(phi) * s.transfer.row(1);
}

}  // namespace

FrequencyGrid FrequencyGrid::linear(double lo, double hi, std::size_t n) {
  check_grid_bounds(lo, hi, n);
  if (!(lo > 0.0)) throw ValidationError("analysis frequencies must be > 0");
  FrequencyGrid g;
  g.scale = Scale::kLinear;
  g.points.resize(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g.points[i] = lo + step * static_cast<double>(i);
  g.points.back() = hi;
  return g;
}

FrequencyGrid FrequencyGrid::logarithmic(double lo, double hi, std::size_t n) {
  check_grid_bounds(lo, hi, n);
  if (!(lo > 0.0)) throw ValidationError("a log grid needs a positive lower bound");
  FrequencyGrid g;
  g.scale = Scale::kLog;
  g.points.resize(n);
  const double span = std::log(hi / lo);
  for (std::size_t i = 0; i < n; ++i)
    g.points[i] = lo * std::exp(span * static_cast<double>(i) / static_cast<double>(n - 1));
  g.points.front() = lo;
  g.points.back() = hi;
  return g;
}

FrequencyGrid FrequencyGrid::standard() {
  return logarithmic(constants::kTwoPi * 10.0, constants::kTwoPi * 1e7, 400);
}

Susceptibility susceptibility(const LinearModel& model, double omega) {
  const std::complex<double> iw(0.0, omega);
  const Matrix4cd m = -iw * Matrix4cd::Identity() - model.drift.cast<std::complex<double>>();
  Eigen::PartialPivLU<Matrix4cd> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > std::numeric_limits<double>::epsilon())) {
    std::ostringstream os;
    os << "susceptibility is singular at omega = " << omega << " rad/s";
    throw InstabilityError(os.str());
  }
  return {lu.inverse(), 1.0 / rcond};
}

Matrix4cd intracavity_spectrum(const LinearModel& model, double omega) {
  const Matrix4cd chi = susceptibility(model, omega).chi;
  return chi * model.diffusion.cast<std::complex<double>>() * chi.adjoint();
}

QuadratureSpectra output_spectra_unchecked(const LinearModel& model, double omega) {
  const Susceptibility chi = susceptibility(model, omega);

  Eigen::Matrix<double, 4, kNoiseChannels> b = Eigen::Matrix<double, 4, kNoiseChannels>::Zero();
  const double port = std::sqrt(model.eta_c * model.kappa);
  const double loss = std::sqrt((1.0 - model.eta_c) * model.kappa);
  b(kOptQ, kInQ) = port;
  b(kOptP, kInP) = port;
  b(kOptQ, kLossQ) = loss;
  b(kOptP, kLossP) = loss;
  b.col(kBath) = model.signal_input;

  QuadratureSpectra s;
  s.omega = omega;
  s.condition = chi.condition;
  const Eigen::Matrix<std::complex<double>, 2, 4> top = port * chi.chi.topRows<2>();
  s.transfer = top * b.cast<std::complex<double>>();
  s.transfer(0, kInQ) -= 1.0;
  s.transfer(1, kInP) -= 1.0;
  s.signal_transfer = top * model.signal_input.cast<std::complex<double>>();

  s.input_noise.setConstant(kVacuumVariance);
  s.input_noise(kBath) = model.thermal_occupancy + kVacuumVariance;

  for (int k = 0; k < kNoiseChannels; ++k) {
    const auto tq = s.transfer(0, k);
    const auto tp = s.transfer(1, k);
    const double n = s.input_noise(k);
    s.s_qq += std::norm(tq) * n;
    s.s_pp += std::norm(tp) * n;
    s.s_qp += std::real(tq * std::conj(tp)) * n;
  }
  return s;
}

QuadratureSpectra output_spectra(const LinearModel& model, double omega) {
  require_stable(model);
  return output_spectra_unchecked(model, omega);
}

double homodyne_spectrum(const QuadratureSpectra& s, double phi) {
  const double c = std::cos(phi);
  const double sn = std::sin(phi);
  return c * c * s.s_qq + sn * sn * s.s_pp + 2.0 * c * sn * s.s_qp;
}

double optimal_squeezing_angle(const QuadratureSpectra& s) {
  // S(phi) = (a + b)/2 + (a - b)/2 cos 2phi + x sin 2phi.
  double phi = 0.5 * std::atan2(-2.0 * s.s_qp, -(s.s_qq - s.s_pp));
  if (phi < 0.0) phi += constants::kPi;
  if (phi >= constants::kPi) phi -= constants::kPi;
  return phi;
}

double mechanical_response(const QuadratureSpectra& s, double phi) {
  return std::norm(std::cos(phi) * s.signal_transfer(0) + std::sin(phi) * s.signal_transfer(1));
}

double added_noise(const QuadratureSpectra& s, double phi) {
  const double r = mechanical_response(s, phi);
  if (!(r > 0.0)) throw Error("homodyne quadrature carries no force signal (R_m = 0)");
  // Summing the non-bath channels directly avoids cancelling n_m + 1/2.
  const auto t = homodyne_row(s, phi);
  double imprecision = 0.0;
  for (int k = 0; k < kNoiseChannels; ++k)
    if (k != kBath) imprecision += std::norm(t(k)) * s.input_noise(k);
  return imprecision / r;
}

std::complex<double> mechanical_susceptibility(double omega_m, double gamma_m, double omega) {
  return omega_m / std::complex<double>(omega_m * omega_m - omega * omega, -omega * gamma_m);
}

double standard_quantum_limit(double omega_m, double gamma_m, double omega) {
  return 1.0 / (2.0 * gamma_m * std::abs(mechanical_susceptibility(omega_m, gamma_m, omega)));
}

double analytic_added_noise(double coupling, double kappa, double gamma_m, double chi_m_abs) {
  const double g2 = coupling * coupling;
  return g2 / (kappa * gamma_m) + kappa / (16.0 * g2 * gamma_m * chi_m_abs * chi_m_abs);
}

double force_noise(const PhysicalParams& params, double n_th, double n_add) {
  return 2.0 * constants::kHbar * params.mass * params.gamma_m * params.mechanical_frequency() *
         (n_th + n_add);
}

Squeezing squeezing(const QuadratureSpectra& s, double phi) {
  Squeezing q;
  q.s_qz = homodyne_spectrum(s, phi);
  q.squeeze_db = -std::log10(2.0 * q.s_qz);
  return q;
}

SpectrumRecord evaluate_record(const LinearModel& model, const PhysicalParams& params,
                               double omega, AnglePolicy angle) {
  const QuadratureSpectra s = output_spectra_unchecked(model, omega);
  SpectrumRecord r;
  r.omega = omega;
  r.s_qq = s.s_qq;
  r.s_pp = s.s_pp;
  r.s_qp = s.s_qp;
  r.condition = s.condition;
  r.phi = angle.optimal ? optimal_squeezing_angle(s) : angle.phi;
  r.r_m = mechanical_response(s, r.phi);
  r.n_add = r.r_m > 0.0 ? added_noise(s, r.phi) : std::numeric_limits<double>::infinity();
  r.n_sql = standard_quantum_limit(params.mechanical_frequency(), params.gamma_m, omega);
  r.s_ff = force_noise(params, model.thermal_occupancy, r.n_add);
  const Squeezing q = squeezing(s, r.phi);
  r.s_qz = q.s_qz;
  r.squeeze_db = q.squeeze_db;
  return r;
}

std::vector<SpectrumRecord> evaluate_spectrum(const LinearModel& model,
                                              const PhysicalParams& params,
                                              const FrequencyGrid& grid, AnglePolicy angle) {
  require_stable(model);
  std::vector<SpectrumRecord> out;
  out.reserve(grid.points.size());
  for (double w : grid.points) out.push_back(evaluate_record(model, params, w, angle));
  return out;
}

}  // namespace spinsense
