#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spinsense {

// Physical constants (SI, exact CODATA 2018 definitions).
namespace constants {
inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kHbar = 1.054571817e-34;
inline constexpr double kBoltzmann = 1.380649e-23;
}  // namespace constants

/// Symmetrized variance of a vacuum quadrature for dq = (da^dag + da)/sqrt(2).
/// The mechanical bath contributes n_m + kVacuumVariance in the same units.
inline constexpr double kVacuumVariance = 0.5;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter set violates one of its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The linearized dynamics have no stationary state.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

enum class Direction { kForward, kBackward };

enum class DetuningMode { kCompensated };

const char* to_string(Direction d);

/// Experimental constants of the spinning resonator, its mechanical mode, the
/// drive and the bath. Rates are angular (rad/s).
struct PhysicalParams {
  double refractive_index = 1.4;
  double radius = 40e-6;             // m
  double wavelength = 1550e-9;       // m, vacuum
  double dn_dlambda = 0.0;           // 1/m
  double optical_q = 3.2e7;
  double kappa = constants::kTwoPi * 6.43e6;
  double eta_c = 1.0;
  double mass = 10e-12;              // kg (10 ng)
  double mechanical_q = 1.21e4;
  double gamma_m = constants::kTwoPi * 5.2e3;
  std::optional<double> omega_m;     // derived as Q_m * Gamma_m when unset
  double g0 = constants::kTwoPi * 100.0;
  double input_power = 12e-3;        // W
  DetuningMode detuning_mode = DetuningMode::kCompensated;
  double temperature = 0.13;         // K

  /// Mechanical frequency, explicit or Q_m * Gamma_m.
  double mechanical_frequency() const;
  /// Static optical resonance 2 pi c / lambda.
  double optical_frequency() const;

  bool operator==(const PhysicalParams&) const = default;
};

struct DriveConfig {
  Direction direction = Direction::kForward;
  double rotation_hz = 5690.0;  // nu_rot; the Sagnac term uses 2 pi nu_rot
  double homodyne_angle = constants::kPi / 2.0;

  bool operator==(const DriveConfig&) const = default;
};

/// Throws ValidationError naming the violated bound. Returns non-fatal
/// warnings (currently the omega_0 / Q versus kappa consistency check).
std::vector<std::string> validate(const PhysicalParams& params);
void validate(const DriveConfig& drive);

/// Rotation-induced resonance shift of the mode seen by the drive, rad/s.
/// Forward drive sees +|shift|, backward drive sees -|shift|.
double sagnac_shift(const PhysicalParams& params, const DriveConfig& drive);

/// Mean phonon number k_B T / (hbar Omega_m) of the mechanical bath.
double thermal_occupancy(const PhysicalParams& params);

struct SteadyState {
  double photon_number = 0.0;        // |alpha|^2
  double mech_displacement = 0.0;    // q_m bar (p_m bar = 0)
  double effective_detuning = 0.0;   // Delta tilde, rad/s
  double enhanced_coupling = 0.0;    // g = sqrt(2) g0 |alpha|, rad/s
  double cavity_phase = 0.0;         // arctan(-2 Delta tilde / kappa)
  double sagnac_shift = 0.0;         // rad/s
  double thermal_occupancy = 0.0;
  double drive_frequency = 0.0;      // omega_l, rad/s
};

/// Classical working point with the compensated drive detuning
/// Delta_c = -g0 q_m bar, so that the effective detuning equals the Sagnac
/// shift. The radiation-pressure pull on omega_l is solved in closed form.
SteadyState steady_state(const PhysicalParams& params, const DriveConfig& drive);

/// Working point with a prescribed enhanced coupling and detuning. Used when
/// g is swept directly rather than through the input power.
SteadyState steady_state_from_coupling(const PhysicalParams& params, double coupling,
                                       double detuning);

using Matrix4d = Eigen::Matrix4d;
using Vector4d = Eigen::Vector4d;

/// Index of each fluctuation in the state vector (dq, dp, dq_m, dp_m).
enum StateIndex : int { kOptQ = 0, kOptP = 1, kMechQ = 2, kMechP = 3 };

/// Linearized fluctuation dynamics dx/dt = A x + noise.
struct LinearModel {
  Matrix4d drift;
  Matrix4d diffusion;
  Vector4d signal_input;
  // Kept for the input-output relation.
  double kappa = 0.0;
  double eta_c = 1.0;
  double gamma_m = 0.0;
  double thermal_occupancy = 0.0;
};

LinearModel build_linear_model(const SteadyState& steady, const PhysicalParams& params);

struct Stability {
  bool stable = false;
  double spectral_abscissa = 0.0;  // max real part of the drift eigenvalues
};

Stability stability_check(const LinearModel& model);

/// Throws InstabilityError unless the model is strictly stable.
void require_stable(const LinearModel& model);

}  // namespace spinsense
