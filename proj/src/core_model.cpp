#include "spinsense/core_model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace spinsense {

namespace {

[[noreturn]] void fail(const std::string& what) { throw ValidationError(what); }

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) fail(std::string(name) + " must be finite");
}

}  // namespace

const char* to_string(Direction d) { return d == Direction::kForward ? "forward" : "backward"; }

double PhysicalParams::mechanical_frequency() const {
  return omega_m ? *omega_m : mechanical_q * gamma_m;
}

double PhysicalParams::optical_frequency() const {
  return constants::kTwoPi * constants::kSpeedOfLight / wavelength;
}

std::vector<std::string> validate(const PhysicalParams& p) {
  const std::pair<double, const char*> fields[] = {
      {p.refractive_index, "refractive_index"}, {p.radius, "radius"},
      {p.wavelength, "wavelength"},             {p.dn_dlambda, "dn_dlambda"},
      {p.optical_q, "optical_q"},               {p.kappa, "kappa"},
      {p.eta_c, "eta_c"},                       {p.mass, "mass"},
      {p.mechanical_q, "mechanical_q"},         {p.gamma_m, "gamma_m"},
      {p.g0, "g0"},                             {p.input_power, "input_power"},
      {p.temperature, "temperature"}};
  for (const auto& [v, name] : fields) require_finite(v, name);

  if (!(p.refractive_index > 1.0)) fail("refractive_index must be > 1");
  if (!(p.radius > 0.0)) fail("radius must be > 0");
  if (!(p.wavelength > 0.0)) fail("wavelength must be > 0");
  if (!(p.kappa > 0.0)) fail("kappa must be > 0 (stationary state undefined for a lossless cavity)");
  if (!(p.gamma_m > 0.0)) fail("gamma_m must be > 0 (stationary state undefined without damping)");
  if (!(p.mass > 0.0)) fail("mass must be > 0");
  if (!(p.mechanical_q > 0.0)) fail("mechanical_q must be > 0");
  if (!(p.optical_q > 0.0)) fail("optical_q must be > 0");
  if (!(p.input_power >= 0.0)) fail("input_power must be >= 0");
  if (!(p.temperature >= 0.0)) fail("temperature must be >= 0");
  if (!(p.g0 >= 0.0)) fail("g0 must be >= 0");
  if (!(p.eta_c >= 0.0 && p.eta_c <= 1.0)) fail("eta_c must lie in [0, 1]");

  const double derived = p.mechanical_q * p.gamma_m;
  if (p.omega_m) {
    require_finite(*p.omega_m, "omega_m");
    if (!(*p.omega_m > 0.0)) fail("omega_m must be > 0");
    if (std::abs(*p.omega_m - derived) > 0.01 * derived) {
      std::ostringstream os;
      os << "omega_m = " << *p.omega_m << " rad/s disagrees with Q_m * Gamma_m = " << derived
         << " rad/s by more than 1%";
      fail(os.str());
    }
  }

  std::vector<std::string> warnings;
  const double kappa_from_q = p.optical_frequency() / p.optical_q;
  if (std::abs(kappa_from_q - p.kappa) > 0.2 * p.kappa) {
    std::ostringstream os;
    os << "omega_0 / optical_q = " << kappa_from_q << " rad/s differs from kappa = " << p.kappa
       << " rad/s by more than 20%";
    warnings.push_back(os.str());
  }
  return warnings;
}

void validate(const DriveConfig& d) {
  require_finite(d.rotation_hz, "rotation_hz");
  require_finite(d.homodyne_angle, "homodyne_angle");
  if (!(d.rotation_hz >= 0.0)) fail("rotation_hz must be >= 0 (spin sense is fixed; pick the drive direction instead)");
}

double sagnac_shift(const PhysicalParams& p, const DriveConfig& d) {
  const double n = p.refractive_index;
  const double spin = constants::kTwoPi * d.rotation_hz;
  const double magnitude = n * p.radius * spin * p.optical_frequency() / constants::kSpeedOfLight *
                           (1.0 - 1.0 / (n * n) - (p.wavelength / n) * p.dn_dlambda);
  // Keep a true +0 at rest so both directions build bit-identical models.
  if (magnitude == 0.0) return 0.0;
  return d.direction == Direction::kForward ? magnitude : -magnitude;
}

double thermal_occupancy(const PhysicalParams& p) {
  return constants::kBoltzmann * p.temperature / (constants::kHbar * p.mechanical_frequency());
}

SteadyState steady_state(const PhysicalParams& p, const DriveConfig& d) {
  if (p.input_power < 0.0) fail("input_power must be >= 0");
  validate(p);
  validate(d);

  SteadyState s;
  s.sagnac_shift = sagnac_shift(p, d);
  s.effective_detuning = s.sagnac_shift;
  s.thermal_occupancy = thermal_occupancy(p);

  // |alpha|^2 = K / omega_l with omega_l = omega_0 - g0^2 |alpha|^2 / Omega_m.
  // The smaller root of the resulting quadratic, written without cancellation.
  const double omega0 = p.optical_frequency();
  const double omega_m = p.mechanical_frequency();
  const double delta = s.effective_detuning;
  const double flux_factor = 4.0 * p.eta_c * p.kappa * p.input_power /
                             (constants::kHbar * (p.kappa * p.kappa + 4.0 * delta * delta));
  const double pull = p.g0 * p.g0 / omega_m;
  const double disc = omega0 * omega0 - 4.0 * pull * flux_factor;
  if (disc < 0.0) throw ValidationError("no steady state: radiation-pressure pull exceeds the drive frequency");
  s.photon_number = 2.0 * flux_factor / (omega0 + std::sqrt(disc));
  s.drive_frequency = omega0 - pull * s.photon_number;

  s.mech_displacement = -p.g0 * s.photon_number / omega_m;
  s.enhanced_coupling = std::sqrt(2.0) * p.g0 * std::sqrt(s.photon_number);
  s.cavity_phase = std::atan(-2.0 * delta / p.kappa);
  return s;
}

SteadyState steady_state_from_coupling(const PhysicalParams& p, double coupling, double detuning) {
  validate(p);
  if (!(coupling >= 0.0) || !std::isfinite(coupling)) fail("coupling must be finite and >= 0");
  if (!std::isfinite(detuning)) fail("detuning must be finite");
  SteadyState s;
  s.sagnac_shift = detuning;
  s.effective_detuning = detuning;
  s.thermal_occupancy = thermal_occupancy(p);
  s.enhanced_coupling = coupling;
  s.photon_number = p.g0 > 0.0 ? coupling * coupling / (2.0 * p.g0 * p.g0) : 0.0;
  s.mech_displacement = -p.g0 * s.photon_number / p.mechanical_frequency();
  s.cavity_phase = std::atan(-2.0 * detuning / p.kappa);
  s.drive_frequency = p.optical_frequency() - p.g0 * p.g0 * s.photon_number / p.mechanical_frequency();
  return s;
}

LinearModel build_linear_model(const SteadyState& s, const PhysicalParams& p) {
  const double k2 = p.kappa / 2.0;
  const double delta = s.effective_detuning;
  const double g = s.enhanced_coupling;
  const double gs = g * std::sin(s.cavity_phase);
  const double gc = g * std::cos(s.cavity_phase);
  const double omega_m = p.mechanical_frequency();

  LinearModel m;
  // clang-format off
  m.drift << -k2,  delta,  gs,       0.0,
             -delta, -k2, -gc,       0.0,
              0.0,   0.0,  0.0,      omega_m,
             -gc,   -gs,  -omega_m, -p.gamma_m;
  // clang-format on

  m.diffusion.setZero();
  m.diffusion(kOptQ, kOptQ) = p.kappa * kVacuumVariance;
  m.diffusion(kOptP, kOptP) = p.kappa * kVacuumVariance;
  m.diffusion(kMechP, kMechP) = 2.0 * p.gamma_m * (s.thermal_occupancy + kVacuumVariance);

  m.signal_input << 0.0, 0.0, 0.0, std::sqrt(2.0 * p.gamma_m);
  m.kappa = p.kappa;
  m.eta_c = p.eta_c;
  m.gamma_m = p.gamma_m;
  m.thermal_occupancy = s.thermal_occupancy;
  return m;
}

Stability stability_check(const LinearModel& model) {
  Eigen::EigenSolver<Matrix4d> es(model.drift, /*computeEigenvectors=*/false);
  const double abscissa = es.eigenvalues().real().maxCoeff();
  return {abscissa < 0.0, abscissa};
}

void require_stable(const LinearModel& model) {
  const auto st = stability_check(model);
  if (!st.stable) {
    std::ostringstream os;
    os << "linearized dynamics are not strictly stable (spectral abscissa " << st.spectral_abscissa
       << " rad/s)";
    throw InstabilityError(os.str());
  }
}

}  // namespace spinsense
