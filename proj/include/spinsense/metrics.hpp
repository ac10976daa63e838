#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spinsense/core_model.hpp"
#include "spinsense/spectra.hpp"

namespace spinsense {

/// Linearized model of one drive direction at the given rotation rate.
LinearModel model_for(const PhysicalParams& params, const DriveConfig& drive);

/// Output spectra of both drive directions at the same rotation, frequency
/// and readout.
struct DirectionalPair {
  QuadratureSpectra forward;
  QuadratureSpectra backward;
};

/// Throws InstabilityError if either direction is unstable.
DirectionalPair directional_spectra(const PhysicalParams& params, double rotation_hz,
                                    double omega);

/// Quantum nonreciprocity log10(2 S_B) - log10(2 S_F). Exactly antisymmetric
/// under exchange of its arguments.
double qnr(double s_forward, double s_backward);
double qnr(const DirectionalPair& pair, double phi);

/// Angle in [0, pi) maximizing the nonreciprocity. A grid of phi_points
/// angles k pi / phi_points is refined by golden section; ties keep the
/// lowest angle, so a reciprocal pair yields 0.
double qnr_optimal_angle(const DirectionalPair& pair, std::size_t phi_points = 180);

/// Ratio of the lowest static force noise to the lowest spinning force noise
/// over the frequencies where both are defined (NaN marks a masked entry).
double enhancement_factor(std::span<const double> static_sff, std::span<const double> spinning_sff);

/// 10 log10 sqrt(S_FF^SQL / S_FF) in dB.
double quantum_advantage_db(double s_ff_sql, double s_ff);

/// Advantage at a point from phonon-unit noise. With include_thermal false
/// the bath occupancy is left out of both force-noise spectra.
double quantum_advantage_db(double n_add, double n_sql, double n_th, bool include_thermal);

enum class Metric { kSqueezeDb, kQnr, kNAdd, kNAddRatio, kAdvantageDb, kForceNoise };
enum class SweepAxis { kRotation, kOmega, kPhi };
enum class AngleMode { kFixed, kSqueezingOptimal, kQnrOptimal };

const char* to_string(Metric m);
const char* to_string(SweepAxis a);
/// Parses the names printed by to_string; throws ValidationError otherwise.
Metric parse_metric(const std::string& name);
SweepAxis parse_axis(const std::string& name);

/// A single evaluation point. The rotation and readout angle come from
/// drive; omega is the analysis frequency in rad/s.
struct MetricContext {
  PhysicalParams params;
  DriveConfig drive;
  double omega = constants::kTwoPi * 1e3;
  AngleMode angle_mode = AngleMode::kFixed;
  bool include_thermal = false;
  std::size_t phi_points = 180;
};

/// Returns nullopt when the required dynamics are unstable.
std::optional<double> evaluate_metric(Metric metric, const MetricContext& ctx);

/// Applies a sweep coordinate to the context.
void set_axis(MetricContext& ctx, SweepAxis axis, double value);

struct Axis {
  SweepAxis axis = SweepAxis::kRotation;
  std::vector<double> values;  // Hz for rotation, rad/s for omega, rad for phi
};

struct SweepResult {
  std::vector<Axis> axes;
  std::vector<double> values;  // row-major over axes; NaN where masked
  std::vector<bool> masked;
  std::size_t masked_count = 0;
  std::size_t argmin = 0;  // flat index; lowest index wins ties
  std::size_t argmax = 0;

  double at(std::size_t i, std::size_t j = 0) const;
  bool is_masked(std::size_t i, std::size_t j = 0) const;
};

/// Evaluates one or two axes in deterministic row-major order. Unstable points
/// are masked; throws InstabilityError when every point is masked.
SweepResult run_sweep(Metric metric, const MetricContext& base, const std::vector<Axis>& axes);

/// Golden-section minimum of f on [a, b]; nullopt values count as +inf.
struct Minimum {
  double x = 0.0;
  double value = 0.0;
};
using Objective1 = std::function<std::optional<double>(double)>;
Minimum golden_section(const Objective1& f, double a, double b, double tol);

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct Optimum {
  std::vector<double> x;
  double value = 0.0;
};

using ObjectiveN = std::function<std::optional<double>(const std::vector<double>&)>;

/// Coarse grid (lowest index wins ties) followed by golden-section refinement
/// in one dimension or coordinate descent in two. A refined point replaces the
/// grid point only if strictly better. Throws InstabilityError if no grid
/// point is defined.
Optimum minimize(const ObjectiveN& f, const std::vector<Bounds>& bounds, std::size_t grid_points,
                 double tol);

enum class Goal { kMinimize, kMaximize };

/// Optimizes a metric over one or two axes of the context.
Optimum optimize_metric(Metric metric, Goal goal, const MetricContext& base,
                        const std::vector<SweepAxis>& axes, const std::vector<Bounds>& bounds,
                        std::size_t grid_points = 41, double tol = 1e-6);

}  // namespace spinsense
