#include "spinsense/cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "spinsense/core_model.hpp"
#include "spinsense/gaussian_state.hpp"
#include "spinsense/metrics.hpp"
#include "spinsense/profile.hpp"
#include "spinsense/spectra.hpp"

namespace spinsense {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_hz(double omega) { return omega / constants::kTwoPi; }

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : columns_(header.size()) { row_strings(header); }

  void row(const std::vector<double>& values) {
    std::vector<std::string> s;
    s.reserve(values.size());
    for (double v : values) s.push_back(fmt(v));
    row_strings(s);
  }

  void row_strings(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw Error("CSV row width does not match its header");
    for (std::size_t i = 0; i < cells.size(); ++i) text_ << (i ? "," : "") << cells[i];
    text_ << "\n";
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    const std::string s = text_.str();
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!f) throw IoError("failed writing '" + path.string() + "'");
  }

 private:
  std::size_t columns_;
  std::ostringstream text_;
};

enum class AngleChoice { kFixed, kSqueezingOptimal, kQnrOptimal };

struct Options {
  std::string profile_path;
  std::string output_dir = ".";
  std::string direction;
  std::optional<double> nu_rot_hz;
  std::string phi_lo;
  std::optional<double> omega_hz;
  bool include_thermal = false;

  // Resolved.
  Profile profile;
  AngleChoice angle = AngleChoice::kFixed;
};

struct Diagnostics {
  std::ostream& err;
  bool color;

  void notice(const std::string& msg) const { err << tag("notice", "36") << msg << "\n"; }
  void warning(const std::string& msg) const { err << tag("warning", "33") << msg << "\n"; }
  void error(const std::string& msg) const { err << tag("error", "31") << msg << "\n"; }

  std::string tag(const char* word, const char* code) const {
    if (!color) return std::string(word) + ": ";
    return std::string("\x1b[") + code + "m" + word + "\x1b[0m: ";
  }
};

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw ValidationError(what + " must be a number, got '" + text + "'");
  return v;
}

void resolve(Options& o, const Diagnostics& diag) {
  if (o.profile_path.empty()) {
    diag.notice("no --profile given; using the default profile");
  } else {
    LoadedProfile loaded = load_profile(o.profile_path);
    for (const auto& n : loaded.notices) diag.notice(n);
    o.profile = std::move(loaded.profile);
  }
  DriveConfig& d = o.profile.drive;
  if (!o.direction.empty()) {
    if (o.direction == "forward") d.direction = Direction::kForward;
    else if (o.direction == "backward") d.direction = Direction::kBackward;
    else throw ValidationError("--direction must be forward or backward");
  }
  if (o.nu_rot_hz) d.rotation_hz = *o.nu_rot_hz;
  if (o.omega_hz) o.profile.grids.analysis_omega_hz = *o.omega_hz;
  if (o.phi_lo == "optimal") {
    o.angle = AngleChoice::kSqueezingOptimal;
  } else if (o.phi_lo == "qnr") {
    o.angle = AngleChoice::kQnrOptimal;
  } else if (!o.phi_lo.empty()) {
    d.homodyne_angle = parse_double(o.phi_lo, "--phi-lo");
  }
  validate(o.profile.params);
  validate(d);
  validate(o.profile.grids);
}

std::filesystem::path output_file(const Options& o, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(o.output_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + o.output_dir + "': " + ec.message());
  return std::filesystem::path(o.output_dir) / name;
}

double analysis_omega(const Options& o) {
  return constants::kTwoPi * o.profile.grids.analysis_omega_hz;
}

MetricContext context(const Options& o) {
  MetricContext ctx;
  ctx.params = o.profile.params;
  ctx.drive = o.profile.drive;
  ctx.omega = analysis_omega(o);
  ctx.include_thermal = o.include_thermal;
  ctx.phi_points = o.profile.grids.phi_points;
  switch (o.angle) {
    case AngleChoice::kFixed: ctx.angle_mode = AngleMode::kFixed; break;
    case AngleChoice::kSqueezingOptimal: ctx.angle_mode = AngleMode::kSqueezingOptimal; break;
    case AngleChoice::kQnrOptimal: ctx.angle_mode = AngleMode::kQnrOptimal; break;
  }
  return ctx;
}

std::vector<double> axis_values(const Options& o, SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kRotation: return rotation_grid(o.profile.grids);
    case SweepAxis::kOmega: return omega_grid(o.profile.grids).points;
    case SweepAxis::kPhi: return angle_grid(o.profile.grids);
  }
  return {};
}

std::string axis_column(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kRotation: return "nu_rot_hz";
    case SweepAxis::kOmega: return "omega_hz";
    case SweepAxis::kPhi: return "phi_lo_rad";
  }
  return "?";
}

double axis_display(SweepAxis axis, double v) { return axis == SweepAxis::kOmega ? to_hz(v) : v; }

Bounds axis_bounds(const Options& o, SweepAxis axis) {
  const GridSettings& g = o.profile.grids;
  switch (axis) {
    case SweepAxis::kRotation: return {g.nu_min_hz, g.nu_max_hz};
    case SweepAxis::kOmega:
      return {constants::kTwoPi * g.omega_min_hz, constants::kTwoPi * g.omega_max_hz};
    case SweepAxis::kPhi: return {0.0, constants::kPi};
  }
  return {};
}

std::vector<SweepAxis> parse_axes(const std::string& text) {
  std::vector<SweepAxis> axes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) axes.push_back(parse_axis(item));
  if (axes.empty() || axes.size() > 2) throw ValidationError("expected one or two comma-separated axes");
  return axes;
}

double angle_for(const Options& o, const QuadratureSpectra& own, const PhysicalParams& params,
                 double omega) {
  switch (o.angle) {
    case AngleChoice::kFixed: return o.profile.drive.homodyne_angle;
    case AngleChoice::kSqueezingOptimal: return optimal_squeezing_angle(own);
    case AngleChoice::kQnrOptimal:
      return qnr_optimal_angle(directional_spectra(params, o.profile.drive.rotation_hz, omega),
                               o.profile.grids.phi_points);
  }
  return o.profile.drive.homodyne_angle;
}

void warn_conditioning(double worst, const Diagnostics& diag) {
  if (worst > kConditionWarning) {
    std::ostringstream os;
    os << "susceptibility condition number reached " << worst << "; results may be inaccurate";
    diag.warning(os.str());
  }
}

// --- subcommands ------------------------------------------------------------

int cmd_validate(const Options& o, std::ostream& out, const Diagnostics& diag) {
  const PhysicalParams& p = o.profile.params;
  const SteadyState s = steady_state(p, o.profile.drive);
  const LinearModel m = build_linear_model(s, p);
  const Stability st = stability_check(m);
  out << "profile            " << o.profile.name << "\n"
      << "direction          " << to_string(o.profile.drive.direction) << "\n"
      << "nu_rot_hz          " << fmt(o.profile.drive.rotation_hz) << "\n"
      << "sagnac_shift_hz    " << fmt(to_hz(s.sagnac_shift)) << "\n"
      << "shift_over_kappa   " << fmt(s.sagnac_shift / p.kappa) << "\n"
      << "photon_number      " << fmt(s.photon_number) << "\n"
      << "coupling_g_hz      " << fmt(to_hz(s.enhanced_coupling)) << "\n"
      << "g_over_kappa       " << fmt(s.enhanced_coupling / p.kappa) << "\n"
      << "omega_m_hz         " << fmt(to_hz(p.mechanical_frequency())) << "\n"
      << "thermal_phonons    " << fmt(s.thermal_occupancy) << "\n"
      << "spectral_abscissa  " << fmt(st.spectral_abscissa) << "\n"
      << "stable             " << (st.stable ? "yes" : "no") << "\n";
  if (!st.stable) {
    if (o.profile.allow_unstable) {
      diag.warning("working point is unstable (allowed by the profile)");
      return kExitOk;
    }
    diag.error("working point is unstable");
    return kExitInstability;
  }
  return kExitOk;
}

int cmd_spectrum(const Options& o, std::ostream& out, const Diagnostics& diag) {
  const PhysicalParams& p = o.profile.params;
  const LinearModel model = model_for(p, o.profile.drive);
  require_stable(model);
  const FrequencyGrid grid = omega_grid(o.profile.grids);

  Csv csv({"omega_hz", "s_qq", "s_pp", "s_qp", "r_m", "n_add", "n_sql", "s_ff", "s_qz", "squeeze_db",
           "phi_lo_rad"});
  double worst = 1.0;
  for (double w : grid.points) {
    const QuadratureSpectra s = output_spectra_unchecked(model, w);
    const double phi = angle_for(o, s, p, w);
    const SpectrumRecord r = evaluate_record(model, p, w, AnglePolicy::fixed(phi));
    worst = std::max(worst, r.condition);
    csv.row({to_hz(w), r.s_qq, r.s_pp, r.s_qp, r.r_m, r.n_add, r.n_sql, r.s_ff, r.s_qz, r.squeeze_db,
             r.phi});
  }
  warn_conditioning(worst, diag);
  const auto path = output_file(o, "spectrum.csv");
  csv.write(path);
  out << "wrote " << path.string() << " (" << grid.points.size() << " rows)\n";
  return kExitOk;
}

int cmd_squeeze(const Options& o, std::ostream& out, const Diagnostics&) {
  const PhysicalParams& p = o.profile.params;
  DriveConfig fwd = o.profile.drive;
  fwd.direction = Direction::kForward;
  DriveConfig bwd = fwd;
  bwd.direction = Direction::kBackward;
  DriveConfig rest = fwd;
  rest.rotation_hz = 0.0;
  const LinearModel mf = model_for(p, fwd);
  const LinearModel mb = model_for(p, bwd);
  const LinearModel ms = model_for(p, rest);
  require_stable(ms);
  const bool f_ok = stability_check(mf).stable;
  const bool b_ok = stability_check(mb).stable;
  if (!f_ok && !b_ok) throw InstabilityError("both drive directions are unstable");

  Csv csv({"omega_hz", "phi_lo_rad", "forward_s_qz", "forward_squeeze_db", "backward_s_qz",
           "backward_squeeze_db", "static_s_qz", "static_squeeze_db", "qnr"});
  const FrequencyGrid grid = omega_grid(o.profile.grids);
  for (double w : grid.points) {
    const auto sf = f_ok ? std::optional(output_spectra_unchecked(mf, w)) : std::nullopt;
    const auto sb = b_ok ? std::optional(output_spectra_unchecked(mb, w)) : std::nullopt;
    const QuadratureSpectra ss = output_spectra_unchecked(ms, w);
    double phi = o.profile.drive.homodyne_angle;
    if (o.angle == AngleChoice::kSqueezingOptimal) {
      phi = optimal_squeezing_angle(sf ? *sf : *sb);
    } else if (o.angle == AngleChoice::kQnrOptimal) {
      if (!sf || !sb) throw InstabilityError("nonreciprocity-optimal angle needs both directions stable");
      phi = qnr_optimal_angle({*sf, *sb}, o.profile.grids.phi_points);
    }
    const Squeezing qs = squeezing(ss, phi);
    const Squeezing qf = sf ? squeezing(*sf, phi) : Squeezing{kNaN, kNaN};
    const Squeezing qb = sb ? squeezing(*sb, phi) : Squeezing{kNaN, kNaN};
    const double q = sf && sb ? qnr(qf.s_qz, qb.s_qz) : kNaN;
    csv.row({to_hz(w), phi, qf.s_qz, qf.squeeze_db, qb.s_qz, qb.squeeze_db, qs.s_qz, qs.squeeze_db, q});
  }
  const auto path = output_file(o, "squeeze.csv");
  csv.write(path);
  out << "wrote " << path.string() << " (" << grid.points.size() << " rows)\n";
  return kExitOk;
}

int cmd_wigner(const Options& o, std::ostream& out, const Diagnostics&) {
  const PhysicalParams& p = o.profile.params;
  Csv csv({"case", "pair", "v_11", "v_12", "v_22", "major_axis", "minor_axis", "angle_rad",
           "optical_min_variance", "squeezed", "uncertainty_margin"});
  struct Case {
    const char* name;
    Direction dir;
    double nu;
  };
  const Case cases[] = {{"static", Direction::kForward, 0.0},
                        {"forward", Direction::kForward, o.profile.drive.rotation_hz},
                        {"backward", Direction::kBackward, o.profile.drive.rotation_hz}};
  const std::pair<QuadraturePair, const char*> pairs[] = {{QuadraturePair::kOptical, "optical"},
                                                          {QuadraturePair::kMechanical, "mechanical"},
                                                          {QuadraturePair::kCross, "cross"}};
  std::size_t rows = 0;
  for (const Case& c : cases) {
    DriveConfig d = o.profile.drive;
    d.direction = c.dir;
    d.rotation_hz = c.nu;
    const LinearModel m = model_for(p, d);
    if (!stability_check(m).stable) {
      for (const auto& [pair, name] : pairs) {
        csv.row_strings({c.name, name, "nan", "nan", "nan", "nan", "nan", "nan", "nan", "unstable", "nan"});
        ++rows;
      }
      continue;
    }
    const Covariance cov = solve_lyapunov(m);
    const SqueezingWitness wit = quadrature_squeezing_witness(cov.v);
    const double margin = uncertainty_margin(cov.v);
    for (const auto& [pair, name] : pairs) {
      const WignerProjection w = wigner_projection(cov.v, pair);
      csv.row_strings({c.name, name, fmt(w.v(0, 0)), fmt(w.v(0, 1)), fmt(w.v(1, 1)), fmt(w.major_axis),
                       fmt(w.minor_axis), fmt(w.angle), fmt(wit.min_variance), wit.squeezed ? "yes" : "no",
                       fmt(margin)});
      ++rows;
    }
  }
  const auto path = output_file(o, "wigner.csv");
  csv.write(path);
  out << "wrote " << path.string() << " (" << rows << " rows)\n";
  return kExitOk;
}

void write_sweep(const Options& o, const SweepResult& r, Metric metric, const std::string& file,
                 std::ostream& out, const Diagnostics& diag) {
  std::vector<std::string> header;
  for (const Axis& a : r.axes) header.push_back(axis_column(a.axis));
  header.push_back(to_string(metric));
  header.push_back("masked");
  Csv csv(header);
  const std::size_t rows = r.axes[0].values.size();
  const std::size_t cols = r.axes.size() > 1 ? r.axes[1].values.size() : 1;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      std::vector<double> row{axis_display(r.axes[0].axis, r.axes[0].values[i])};
      if (r.axes.size() > 1) row.push_back(axis_display(r.axes[1].axis, r.axes[1].values[j]));
      row.push_back(r.at(i, j));
      row.push_back(r.is_masked(i, j) ? 1.0 : 0.0);
      csv.row(row);
    }
  const auto path = output_file(o, file);
  csv.write(path);
  out << "wrote " << path.string() << " (" << r.values.size() << " rows, " << r.masked_count
      << " masked)\n";
  if (r.masked_count) diag.notice(std::to_string(r.masked_count) + " unstable grid points were masked");

  const auto describe = [&](const char* label, std::size_t k) {
    out << label;
    for (std::size_t a = 0; a < r.axes.size(); ++a) {
      const std::size_t idx = a == 0 ? k / cols : k % cols;
      out << " " << axis_column(r.axes[a].axis) << "=" << fmt(axis_display(r.axes[a].axis, r.axes[a].values[idx]));
    }
    out << " value=" << fmt(r.values[k]) << "\n";
  };
  describe("grid argmin", r.argmin);
  describe("grid argmax", r.argmax);
}

int cmd_qnr(const Options& o, const std::string& sweep, std::ostream& out, const Diagnostics& diag) {
  const std::vector<SweepAxis> names = parse_axes(sweep);
  std::vector<Axis> axes;
  for (SweepAxis a : names) axes.push_back({a, axis_values(o, a)});
  const MetricContext ctx = context(o);
  const SweepResult r = run_sweep(Metric::kQnr, ctx, axes);
  write_sweep(o, r, Metric::kQnr, "qnr.csv", out, diag);

  std::vector<Bounds> bounds;
  for (SweepAxis a : names) bounds.push_back(axis_bounds(o, a));
  const Optimum best = optimize_metric(Metric::kQnr, Goal::kMaximize, ctx, names, bounds);
  out << "refined maximum";
  for (std::size_t a = 0; a < names.size(); ++a)
    out << " " << axis_column(names[a]) << "=" << fmt(axis_display(names[a], best.x[a]));
  out << " qnr=" << fmt(best.value) << "\n";
  return kExitOk;
}

int cmd_sweep(const Options& o, const std::string& metric_name, const std::string& axes_text,
              std::ostream& out, const Diagnostics& diag) {
  const Metric metric = parse_metric(metric_name);
  std::vector<Axis> axes;
  for (SweepAxis a : parse_axes(axes_text)) axes.push_back({a, axis_values(o, a)});
  const SweepResult r = run_sweep(metric, context(o), axes);
  write_sweep(o, r, metric, "sweep.csv", out, diag);
  return kExitOk;
}

int cmd_optimize(const Options& o, const std::string& metric_name, const std::string& over,
                 const std::string& goal_text, std::size_t grid_points, double tol, std::ostream& out) {
  const Metric metric = parse_metric(metric_name);
  Goal goal;
  if (goal_text == "min") goal = Goal::kMinimize;
  else if (goal_text == "max") goal = Goal::kMaximize;
  else throw ValidationError("--goal must be min or max");
  const std::vector<SweepAxis> axes = parse_axes(over);
  std::vector<Bounds> bounds;
  for (SweepAxis a : axes) bounds.push_back(axis_bounds(o, a));
  const Optimum best = optimize_metric(metric, goal, context(o), axes, bounds, grid_points, tol);

  std::vector<std::string> header;
  std::vector<double> row;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    header.push_back(axis_column(axes[a]));
    row.push_back(axis_display(axes[a], best.x[a]));
  }
  header.push_back(to_string(metric));
  row.push_back(best.value);
  Csv csv(header);
  csv.row(row);
  const auto path = output_file(o, "optimize.csv");
  csv.write(path);
  for (std::size_t a = 0; a < axes.size(); ++a) out << header[a] << "=" << fmt(row[a]) << " ";
  out << to_string(metric) << "=" << fmt(best.value) << "\n";
  return kExitOk;
}

int cmd_advantage(const Options& o, std::ostream& out, const Diagnostics& diag) {
  const PhysicalParams& p = o.profile.params;
  const double n_th = thermal_occupancy(p);
  const double omega_m = p.mechanical_frequency();
  const double phi = o.profile.drive.homodyne_angle;
  if (o.angle != AngleChoice::kFixed)
    diag.notice("advantage uses the fixed --phi-lo angle; optimal modes apply to spectrum and squeeze");

  // Force noise over omega, thermal bath optional; NaN where unstable.
  const auto scan = [&](Direction dir, double nu) {
    DriveConfig d = o.profile.drive;
    d.direction = dir;
    d.rotation_hz = nu;
    const LinearModel m = model_for(p, d);
    const FrequencyGrid grid = omega_grid(o.profile.grids);
    std::vector<double> n_add(grid.points.size(), kNaN);
    if (!stability_check(m).stable) return n_add;
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
      const QuadratureSpectra s = output_spectra_unchecked(m, grid.points[i]);
      n_add[i] = mechanical_response(s, phi) > 0.0 ? added_noise(s, phi)
                                                   : std::numeric_limits<double>::infinity();
    }
    return n_add;
  };
  const auto to_sff = [&](const std::vector<double>& n_add) {
    std::vector<double> sff(n_add.size());
    for (std::size_t i = 0; i < n_add.size(); ++i)
      sff[i] = force_noise(p, o.include_thermal ? n_th : 0.0, n_add[i]);
    return sff;
  };
  const auto advantage = [&](double n_add, double n_sql) {
    if (std::isnan(n_add)) return kNaN;
    if (std::isinf(n_add)) return -std::numeric_limits<double>::infinity();
    return quantum_advantage_db(n_add, n_sql, n_th, o.include_thermal);
  };

  const double nu = o.profile.drive.rotation_hz;
  const FrequencyGrid grid = omega_grid(o.profile.grids);
  const auto n_static = scan(Direction::kForward, 0.0);
  const auto n_fwd = scan(Direction::kForward, nu);
  const auto n_bwd = scan(Direction::kBackward, nu);
  if (std::isnan(n_static.front())) throw InstabilityError("static device is unstable");

  Csv by_omega({"omega_hz", "n_sql", "static_n_add", "forward_n_add", "backward_n_add", "static_advantage_db",
            "forward_advantage_db", "backward_advantage_db", "static_s_ff", "forward_s_ff", "backward_s_ff"});
  const auto sff_static = to_sff(n_static);
  const auto sff_fwd = to_sff(n_fwd);
  const auto sff_bwd = to_sff(n_bwd);
  double best_db = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    const double n_sql = standard_quantum_limit(omega_m, p.gamma_m, grid.points[i]);
    const double fa = advantage(n_fwd[i], n_sql);
    if (!std::isnan(fa)) best_db = std::max(best_db, fa);
    by_omega.row({to_hz(grid.points[i]), n_sql, n_static[i], n_fwd[i], n_bwd[i], advantage(n_static[i], n_sql), fa,
              advantage(n_bwd[i], n_sql), sff_static[i], sff_fwd[i], sff_bwd[i]});
  }
  const auto omega_path = output_file(o, "advantage.csv");
  by_omega.write(omega_path);

  // Advantage versus rotation at the analysis frequency.
  Csv by_nu({"nu_rot_hz", "forward_advantage_db", "backward_advantage_db"});
  MetricContext ctx = context(o);
  ctx.angle_mode = AngleMode::kFixed;
  for (double v : rotation_grid(o.profile.grids)) {
    ctx.drive.rotation_hz = v;
    ctx.drive.direction = Direction::kForward;
    const auto f = evaluate_metric(Metric::kAdvantageDb, ctx);
    ctx.drive.direction = Direction::kBackward;
    const auto b = evaluate_metric(Metric::kAdvantageDb, ctx);
    by_nu.row({v, f.value_or(kNaN), b.value_or(kNaN)});
  }
  const auto nu_path = output_file(o, "advantage_nu.csv");
  by_nu.write(nu_path);

  out << "wrote " << omega_path.string() << " and " << nu_path.string() << "\n";
  out << "best forward advantage over omega at nu_rot_hz=" << fmt(nu) << ": " << fmt(best_db) << " dB\n";
  if (std::any_of(n_fwd.begin(), n_fwd.end(), [](double v) { return !std::isnan(v); }))
    out << "enhancement factor xi (forward, nu_rot_hz=" << fmt(nu) << "): "
        << fmt(enhancement_factor(sff_static, sff_fwd)) << "\n";

  MetricContext qctx = context(o);
  qctx.angle_mode = AngleMode::kFixed;
  const Optimum q = optimize_metric(Metric::kQnr, Goal::kMaximize, qctx, {SweepAxis::kRotation, SweepAxis::kPhi},
                                    {axis_bounds(o, SweepAxis::kRotation), axis_bounds(o, SweepAxis::kPhi)});
  const auto n_q = scan(Direction::kForward, q.x[0]);
  if (std::any_of(n_q.begin(), n_q.end(), [](double v) { return !std::isnan(v); }))
    out << "enhancement factor xi (forward, nonreciprocity-optimal nu_rot_hz=" << fmt(q.x[0])
        << "): " << fmt(enhancement_factor(sff_static, to_sff(n_q))) << "\n";
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const bool color = std::getenv("NO_COLOR") == nullptr && &err == &std::cerr && ::isatty(2);
  const Diagnostics diag{err, color};

  CLI::App app{"Spinning cavity optomechanical force-sensor simulator", "spinsense"};
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--profile", o.profile_path, "Profile file (defaults apply when omitted)");
  app.add_option("--output", o.output_dir, "Directory for CSV output")->capture_default_str();
  app.add_option("--direction", o.direction, "Drive direction: forward or backward");
  app.add_option("--nu-rot-hz", o.nu_rot_hz, "Rotation frequency in Hz");
  app.add_option("--phi-lo", o.phi_lo, "Homodyne angle: radians, 'optimal' or 'qnr'");
  app.add_option("--omega-hz", o.omega_hz, "Analysis frequency in Hz");
  app.add_flag("--include-thermal", o.include_thermal, "Keep the thermal bath in force-noise figures");

  auto* validate_cmd = app.add_subcommand("validate", "Check a profile and print derived quantities");
  auto* spectrum_cmd = app.add_subcommand("spectrum", "Output spectra and added noise over omega");
  auto* squeeze_cmd = app.add_subcommand("squeeze", "Squeezing of both directions and the static device");
  auto* wigner_cmd = app.add_subcommand("wigner", "Stationary covariance and Wigner ellipses");
  auto* qnr_cmd = app.add_subcommand("qnr", "Nonreciprocity landscape");
  auto* advantage_cmd = app.add_subcommand("advantage", "Quantum advantage and enhancement factor");
  auto* sweep_cmd = app.add_subcommand("sweep", "Dense sweep of one metric");
  auto* optimize_cmd = app.add_subcommand("optimize", "Refined optimum of one metric");

  std::string qnr_sweep = "nu_rot,phi_lo";
  qnr_cmd->add_option("--sweep", qnr_sweep, "Axes: nu_rot, omega, phi_lo")->capture_default_str();
  std::string sweep_metric;
  std::string sweep_axes;
  sweep_cmd->add_option("--metric", sweep_metric, "squeeze_db, qnr, n_add, n_add_ratio, advantage_db, s_ff")
      ->required();
  sweep_cmd->add_option("--axes", sweep_axes, "One or two of nu_rot, omega, phi_lo")->required();
  std::string opt_metric;
  std::string opt_over;
  std::string opt_goal = "min";
  std::size_t opt_grid = 41;
  double opt_tol = 1e-6;
  optimize_cmd->add_option("--metric", opt_metric, "Metric to optimize")->required();
  optimize_cmd->add_option("--over", opt_over, "One or two of nu_rot, omega, phi_lo")->required();
  optimize_cmd->add_option("--goal", opt_goal, "min or max")->capture_default_str();
  optimize_cmd->add_option("--grid-points", opt_grid, "Coarse grid points per axis")->capture_default_str();
  optimize_cmd->add_option("--tol", opt_tol, "Relative refinement tolerance")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    diag.error(e.what());
    return kExitValidation;
  }

  try {
    resolve(o, diag);
    if (validate_cmd->parsed()) return cmd_validate(o, out, diag);
    if (spectrum_cmd->parsed()) return cmd_spectrum(o, out, diag);
    if (squeeze_cmd->parsed()) return cmd_squeeze(o, out, diag);
    if (wigner_cmd->parsed()) return cmd_wigner(o, out, diag);
    if (qnr_cmd->parsed()) return cmd_qnr(o, qnr_sweep, out, diag);
    if (advantage_cmd->parsed()) return cmd_advantage(o, out, diag);
    if (sweep_cmd->parsed()) return cmd_sweep(o, sweep_metric, sweep_axes, out, diag);
    if (optimize_cmd->parsed()) return cmd_optimize(o, opt_metric, opt_over, opt_goal, opt_grid, opt_tol, out);
  } catch (const ParseError& e) {
    diag.error(e.what());
    return kExitValidation;
  } catch (const ValidationError& e) {
    diag.error(e.what());
    return kExitValidation;
  } catch (const InstabilityError& e) {
    diag.error(e.what());
    return kExitInstability;
  } catch (const IoError& e) {
    diag.error(e.what());
    return kExitIo;
  } catch (const Error& e) {
    diag.error(e.what());
    return kExitFailure;
  }
  diag.error("no subcommand given");
  return kExitValidation;
}

}  // namespace spinsense
