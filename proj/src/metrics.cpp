#include "spinsense/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spinsense {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvPhi = 0.6180339887498948482;  // (sqrt(5) - 1) / 2

double value_or_inf(const std::optional<double>& v) {
  return v && !std::isnan(*v) ? *v : kInf;
}

std::optional<QuadratureSpectra> stable_spectra(const LinearModel& model, double omega) {
  if (!stability_check(model).stable) return std::nullopt;
  return output_spectra_unchecked(model, omega);
}

std::optional<DirectionalPair> stable_pair(const PhysicalParams& params, double rotation_hz,
                                           double omega) {
  DriveConfig drive;
  drive.rotation_hz = rotation_hz;
  drive.direction = Direction::kForward;
  auto f = stable_spectra(model_for(params, drive), omega);
  if (!f) return std::nullopt;
  drive.direction = Direction::kBackward;
  auto b = stable_spectra(model_for(params, drive), omega);
  if (!b) return std::nullopt;
  return DirectionalPair{*f, *b};
}

}  // namespace

LinearModel model_for(const PhysicalParams& params, const DriveConfig& drive) {
  return build_linear_model(steady_state(params, drive), params);
}

DirectionalPair directional_spectra(const PhysicalParams& params, double rotation_hz,
                                    double omega) {
  auto pair = stable_pair(params, rotation_hz, omega);
  if (!pair) throw InstabilityError("one of the drive directions is unstable at this rotation rate");
  return *pair;
}

double qnr(double s_forward, double s_backward) {
  if (!(s_forward > 0.0) || !(s_backward > 0.0))
    throw ValidationError("nonreciprocity needs strictly positive spectra");
  return std::log10(2.0 * s_backward) - std::log10(2.0 * s_forward);
}

double qnr(const DirectionalPair& pair, double phi) {
  return qnr(homodyne_spectrum(pair.forward, phi), homodyne_spectrum(pair.backward, phi));
}

double qnr_optimal_angle(const DirectionalPair& pair, std::size_t phi_points) {
  if (phi_points < 2) throw ValidationError("phi_points must be >= 2");
  const double step = constants::kPi / static_cast<double>(phi_points);
  std::size_t best = 0;
  double best_value = -kInf;
  for (std::size_t k = 0; k < phi_points; ++k) {
    const double v = qnr(pair, step * static_cast<double>(k));
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  const double centre = step * static_cast<double>(best);
  const Minimum refined = golden_section([&](double phi) -> std::optional<double> { return -qnr(pair, phi); },
                                         centre - step, centre + step, 1e-10);
  if (-refined.value > best_value) {
    double phi = std::fmod(refined.x, constants::kPi);
    if (phi < 0.0) phi += constants::kPi;
    return phi;
  }
  return centre;
}

double enhancement_factor(std::span<const double> static_sff, std::span<const double> spinning_sff) {
  if (static_sff.size() != spinning_sff.size())
    throw ValidationError("force-noise spectra must share one frequency grid");
  double min_static = kInf;
  double min_spin = kInf;
  bool any = false;
  for (std::size_t i = 0; i < static_sff.size(); ++i) {
    if (std::isnan(static_sff[i]) || std::isnan(spinning_sff[i])) continue;
    any = true;
    min_static = std::min(min_static, static_sff[i]);
    min_spin = std::min(min_spin, spinning_sff[i]);
  }
  if (!any) throw ValidationError("no frequency where both force-noise spectra are defined");
  if (!(min_spin > 0.0)) throw ValidationError("spinning force noise must be positive");
  return min_static / min_spin;
}

double quantum_advantage_db(double s_ff_sql, double s_ff) {
  if (!(s_ff_sql > 0.0) || !(s_ff > 0.0))
    throw ValidationError("quantum advantage needs positive force-noise spectra");
  return 10.0 * std::log10(std::sqrt(s_ff_sql / s_ff));
}

double quantum_advantage_db(double n_add, double n_sql, double n_th, bool include_thermal) {
  const double bath = include_thermal ? n_th : 0.0;
  return quantum_advantage_db(bath + n_sql, bath + n_add);
}

const char* to_string(Metric m) {
  switch (m) {
    case Metric::kSqueezeDb: return "squeeze_db";
    case Metric::kQnr: return "qnr";
    case Metric::kNAdd: return "n_add";
    case Metric::kNAddRatio: return "n_add_ratio";
    case Metric::kAdvantageDb: return "advantage_db";
    case Metric::kForceNoise: return "s_ff";
  }
  return "?";
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::kRotation: return "nu_rot";
    case SweepAxis::kOmega: return "omega";
    case SweepAxis::kPhi: return "phi_lo";
  }
  return "?";
}

Metric parse_metric(const std::string& name) {
  for (Metric m : {Metric::kSqueezeDb, Metric::kQnr, Metric::kNAdd, Metric::kNAddRatio,
                   Metric::kAdvantageDb, Metric::kForceNoise})
    if (name == to_string(m)) return m;
  throw ValidationError("unknown metric '" + name +
                        "' (expected squeeze_db, qnr, n_add, n_add_ratio, advantage_db or s_ff)");
}

SweepAxis parse_axis(const std::string& name) {
  for (SweepAxis a : {SweepAxis::kRotation, SweepAxis::kOmega, SweepAxis::kPhi})
    if (name == to_string(a)) return a;
  throw ValidationError("unknown sweep axis '" + name + "' (expected nu_rot, omega or phi_lo)");
}

void set_axis(MetricContext& ctx, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::kRotation: ctx.drive.rotation_hz = value; break;
    case SweepAxis::kOmega: ctx.omega = value; break;
    case SweepAxis::kPhi:
      ctx.drive.homodyne_angle = value;
      ctx.angle_mode = AngleMode::kFixed;
      break;
  }
}

std::optional<double> evaluate_metric(Metric metric, const MetricContext& ctx) {
  if (!(ctx.omega > 0.0) || !std::isfinite(ctx.omega))
    throw ValidationError("analysis frequency must be finite and > 0");

  std::optional<DirectionalPair> pair;
  if (metric == Metric::kQnr || ctx.angle_mode == AngleMode::kQnrOptimal) {
    pair = stable_pair(ctx.params, ctx.drive.rotation_hz, ctx.omega);
    if (!pair) return std::nullopt;
  }

  std::optional<QuadratureSpectra> own;
  if (pair) {
    own = ctx.drive.direction == Direction::kForward ? pair->forward : pair->backward;
  } else {
    own = stable_spectra(model_for(ctx.params, ctx.drive), ctx.omega);
    if (!own) return std::nullopt;
  }

  double phi = ctx.drive.homodyne_angle;
  switch (ctx.angle_mode) {
    case AngleMode::kFixed: break;
    case AngleMode::kSqueezingOptimal: phi = optimal_squeezing_angle(*own); break;
    case AngleMode::kQnrOptimal: phi = qnr_optimal_angle(*pair, ctx.phi_points); break;
  }

  const double omega_m = ctx.params.mechanical_frequency();
  const double n_th = thermal_occupancy(ctx.params);
  const auto n_add = [&] {
    return mechanical_response(*own, phi) > 0.0 ? added_noise(*own, phi) : kInf;
  };

  switch (metric) {
    case Metric::kSqueezeDb: return squeezing(*own, phi).squeeze_db;
    case Metric::kQnr: return qnr(*pair, phi);
    case Metric::kNAdd: return n_add();
    case Metric::kNAddRatio:
      return n_add() / standard_quantum_limit(omega_m, ctx.params.gamma_m, ctx.omega);
    case Metric::kAdvantageDb: {
      const double n = n_add();
      if (std::isinf(n)) return -kInf;
      return quantum_advantage_db(n, standard_quantum_limit(omega_m, ctx.params.gamma_m, ctx.omega),
                                  n_th, ctx.include_thermal);
    }
    case Metric::kForceNoise:
      return force_noise(ctx.params, ctx.include_thermal ? n_th : 0.0, n_add());
  }
  return std::nullopt;
}

double SweepResult::at(std::size_t i, std::size_t j) const {
  const std::size_t cols = axes.size() > 1 ? axes[1].values.size() : 1;
  return values.at(i * cols + j);
}

bool SweepResult::is_masked(std::size_t i, std::size_t j) const {
  const std::size_t cols = axes.size() > 1 ? axes[1].values.size() : 1;
  return masked.at(i * cols + j);
}

SweepResult run_sweep(Metric metric, const MetricContext& base, const std::vector<Axis>& axes) {
  if (axes.empty() || axes.size() > 2) throw ValidationError("a sweep takes one or two axes");
  for (const Axis& a : axes)
    if (a.values.empty()) throw ValidationError(std::string("sweep axis ") + to_string(a.axis) + " is empty");
  if (axes.size() == 2 && axes[0].axis == axes[1].axis)
    throw ValidationError("sweep axes must differ");

  SweepResult r;
  r.axes = axes;
  const std::size_t rows = axes[0].values.size();
  const std::size_t cols = axes.size() > 1 ? axes[1].values.size() : 1;
  r.values.assign(rows * cols, std::numeric_limits<double>::quiet_NaN());
  r.masked.assign(rows * cols, false);

  for (std::size_t i = 0; i < rows; ++i) {
    MetricContext row = base;
    set_axis(row, axes[0].axis, axes[0].values[i]);
    for (std::size_t j = 0; j < cols; ++j) {
      MetricContext ctx = row;
      if (axes.size() > 1) set_axis(ctx, axes[1].axis, axes[1].values[j]);
      const auto v = evaluate_metric(metric, ctx);
      const std::size_t k = i * cols + j;
      if (v) {
        r.values[k] = *v;
      } else {
        r.masked[k] = true;
        ++r.masked_count;
      }
    }
  }
  if (r.masked_count == r.values.size())
    throw InstabilityError("every sweep point is dynamically unstable");

  bool first = true;
  for (std::size_t k = 0; k < r.values.size(); ++k) {
    if (r.masked[k]) continue;
    if (first || r.values[k] < r.values[r.argmin]) r.argmin = k;
    if (first || r.values[k] > r.values[r.argmax]) r.argmax = k;
    first = false;
  }
  return r;
}

Minimum golden_section(const Objective1& f, double a, double b, double tol) {
  if (a > b) std::swap(a, b);
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = value_or_inf(f(c));
  double fd = value_or_inf(f(d));
  Minimum best{c, fc};
  if (fd < best.value) best = {d, fd};
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = value_or_inf(f(c));
      if (fc < best.value) best = {c, fc};
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = value_or_inf(f(d));
      if (fd < best.value) best = {d, fd};
    }
  }
  return best;
}

Optimum minimize(const ObjectiveN& f, const std::vector<Bounds>& bounds, std::size_t grid_points,
                 double tol) {
  const std::size_t dims = bounds.size();
  if (dims == 0 || dims > 2) throw ValidationError("optimization takes one or two variables");
  if (grid_points < 2) throw ValidationError("optimization grid needs at least 2 points");
  for (const Bounds& b : bounds)
    if (!(b.hi > b.lo) || !std::isfinite(b.lo) || !std::isfinite(b.hi))
      throw ValidationError("optimization bounds must be finite with hi > lo");

  std::vector<double> step(dims);
  for (std::size_t d = 0; d < dims; ++d)
    step[d] = (bounds[d].hi - bounds[d].lo) / static_cast<double>(grid_points - 1);
  const auto node = [&](std::size_t d, std::size_t i) {
    return i + 1 == grid_points ? bounds[d].hi : bounds[d].lo + step[d] * static_cast<double>(i);
  };

  Optimum best;
  best.value = kInf;
  const std::size_t cols = dims > 1 ? grid_points : 1;
  for (std::size_t i = 0; i < grid_points; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      std::vector<double> x{node(0, i)};
      if (dims > 1) x.push_back(node(1, j));
      const double v = value_or_inf(f(x));
      if (v < best.value) best = {x, v};
    }
  if (std::isinf(best.value) && best.value > 0.0)
    throw InstabilityError("no stable point inside the optimization bounds");

  // Coordinate descent; a single pass suffices in one dimension.
  const std::size_t max_sweeps = dims == 1 ? 1 : 50;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    const double before = best.value;
    for (std::size_t d = 0; d < dims; ++d) {
      const double lo = std::max(bounds[d].lo, best.x[d] - step[d]);
      const double hi = std::min(bounds[d].hi, best.x[d] + step[d]);
      std::vector<double> probe = best.x;
      const Minimum m = golden_section(
          [&](double t) {
            probe[d] = t;
            return f(probe);
          },
          lo, hi, tol * (bounds[d].hi - bounds[d].lo));
      if (m.value < best.value) {
        best.x[d] = m.x;
        best.value = m.value;
      }
    }
    if (!(before - best.value > tol * std::max(1.0, std::abs(best.value)))) break;
  }
  return best;
}

Optimum optimize_metric(Metric metric, Goal goal, const MetricContext& base,
                        const std::vector<SweepAxis>& axes, const std::vector<Bounds>& bounds,
                        std::size_t grid_points, double tol) {
  if (axes.size() != bounds.size()) throw ValidationError("one bound pair per optimized axis");
  if (axes.size() == 2 && axes[0] == axes[1]) throw ValidationError("optimized axes must differ");
  const double sign = goal == Goal::kMinimize ? 1.0 : -1.0;
  Optimum o = minimize(
      [&](const std::vector<double>& x) -> std::optional<double> {
        MetricContext ctx = base;
        for (std::size_t d = 0; d < axes.size(); ++d) set_axis(ctx, axes[d], x[d]);
        const auto v = evaluate_metric(metric, ctx);
        if (!v) return std::nullopt;
        return sign * *v;
      },
      bounds, grid_points, tol);
  o.value *= sign;
  return o;
}

}  // namespace spinsense
