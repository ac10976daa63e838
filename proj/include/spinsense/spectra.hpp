#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "spinsense/core_model.hpp"

namespace spinsense {

/// Analysis frequencies in rad/s, strictly increasing and positive.
struct FrequencyGrid {
  enum class Scale { kLinear, kLog };

  std::vector<double> points;
  Scale scale = Scale::kLog;

  static FrequencyGrid linear(double lo, double hi, std::size_t n);
  static FrequencyGrid logarithmic(double lo, double hi, std::size_t n);
  /// 400 log-spaced points from 2 pi 10 Hz to 2 pi 10 MHz.
  static FrequencyGrid standard();
};

using Matrix4cd = Eigen::Matrix4cd;

/// Noise inputs of the input-output relation, in column order of the
/// transfer matrix: coupling-port vacuum (q, p), loss-port vacuum (q, p) and
/// the mechanical bath force.
inline constexpr int kNoiseChannels = 5;
enum NoiseChannel : int { kInQ = 0, kInP = 1, kLossQ = 2, kLossP = 3, kBath = 4 };

using TransferMatrix = Eigen::Matrix<std::complex<double>, 2, kNoiseChannels>;

struct Susceptibility {
  Matrix4cd chi;           // (-i omega I - A)^-1
  double condition = 1.0;  // reciprocal of the LU rcond estimate
};

/// Throws InstabilityError when -i omega I - A is numerically singular.
Susceptibility susceptibility(const LinearModel& model, double omega);

/// Symmetrized intracavity spectrum matrix chi D chi^dagger.
Matrix4cd intracavity_spectrum(const LinearModel& model, double omega);

/// Condition numbers above this are reported as ill-conditioned.
inline constexpr double kConditionWarning = 1e12;

/// Symmetrized output quadrature spectra at one frequency together with the
/// transfer functions they were built from.
struct QuadratureSpectra {
  double omega = 0.0;
  double s_qq = 0.0;
  double s_pp = 0.0;
  double s_qp = 0.0;  // real part of the symmetrized cross spectrum
  TransferMatrix transfer;
  Eigen::Matrix<double, kNoiseChannels, 1> input_noise;
  Eigen::Vector2cd signal_transfer;  // response of (q_out, p_out) to f_sig
  double condition = 1.0;
};

/// Requires a strictly stable model (throws InstabilityError otherwise).
QuadratureSpectra output_spectra(const LinearModel& model, double omega);

/// Same as output_spectra without the stability check, for callers that
/// already verified the model once for a whole grid.
QuadratureSpectra output_spectra_unchecked(const LinearModel& model, double omega);

/// Homodyne spectrum of cos(phi) q_out + sin(phi) p_out.
double homodyne_spectrum(const QuadratureSpectra& s, double phi);

/// Angle in [0, pi) minimizing the homodyne spectrum, from the 2x2 form.
double optimal_squeezing_angle(const QuadratureSpectra& s);

/// |t(omega)|^2 of the signal-force response in the chosen quadrature.
double mechanical_response(const QuadratureSpectra& s, double phi);

/// Added noise in phonon units: detected noise referred to the force input,
/// with the mechanical bath (n_m + 1/2) removed. Throws Error when the
/// quadrature carries no force signal.
double added_noise(const QuadratureSpectra& s, double phi);

/// Oscillator susceptibility Omega_m / (Omega_m^2 - omega^2 - i omega Gamma_m).
std::complex<double> mechanical_susceptibility(double omega_m, double gamma_m, double omega);

/// Standard quantum limit 1 / (2 Gamma_m |chi_m|) in phonon units.
double standard_quantum_limit(double omega_m, double gamma_m, double omega);

/// Added noise of a resonant static cavity read out in the phase quadrature,
/// g^2 / (kappa Gamma_m) + kappa / (16 g^2 Gamma_m |chi_m|^2).
double analytic_added_noise(double coupling, double kappa, double gamma_m, double chi_m_abs);

/// Force noise 2 hbar m Gamma_m Omega_m (n_th + n_add), N^2/Hz.
double force_noise(const PhysicalParams& params, double n_th, double n_add);

struct Squeezing {
  double s_qz = 0.0;
  double squeeze_db = 0.0;  // -log10(2 s_qz); positive means below vacuum
};

Squeezing squeezing(const QuadratureSpectra& s, double phi);

/// Everything reported for a single analysis frequency.
struct SpectrumRecord {
  double omega = 0.0;
  double s_qq = 0.0;
  double s_pp = 0.0;
  double s_qp = 0.0;
  double phi = 0.0;
  double r_m = 0.0;
  double n_add = 0.0;  // +inf when the quadrature is blind to the force
  double n_sql = 0.0;
  double s_ff = 0.0;   // includes the thermal bath
  double s_qz = 0.0;
  double squeeze_db = 0.0;
  double condition = 1.0;
};

/// Readout angle policy: a fixed angle, or the angle minimizing S_qz at each
/// frequency.
struct AnglePolicy {
  bool optimal = false;
  double phi = constants::kPi / 2.0;

  static AnglePolicy fixed(double phi) { return {false, phi}; }
  static AnglePolicy squeezing_optimal() { return {true, 0.0}; }
};

SpectrumRecord evaluate_record(const LinearModel& model, const PhysicalParams& params,
                               double omega, AnglePolicy angle);

/// Evaluates a full grid after a single stability check.
std::vector<SpectrumRecord> evaluate_spectrum(const LinearModel& model,
                                              const PhysicalParams& params,
                                              const FrequencyGrid& grid, AnglePolicy angle);

}  // namespace spinsense
