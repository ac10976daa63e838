#include "spinsense/profile.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace spinsense {

namespace {

enum class Kind { kNumber, kOptionalNumber, kCount, kText, kDirection, kDetuning, kScale, kBool };

struct Unit {
  const char* suffix;
  double scale;  // multiplies the file value into the stored value
};

struct Field {
  const char* section;
  const char* base;
  Kind kind;
  std::vector<Unit> units;  // empty for dimensionless keys
  std::function<double*(Profile&)> number = nullptr;
  std::function<std::size_t*(Profile&)> count = nullptr;
};

constexpr Unit kRateHz{"_hz", constants::kTwoPi};
constexpr Unit kRateRads{"_rads", 1.0};
constexpr Unit kPlainHz{"_hz", 1.0};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    const auto num = [&](const char* sec, const char* base, std::vector<Unit> units,
                         std::function<double*(Profile&)> ref) {
      f.push_back({sec, base, Kind::kNumber, std::move(units), std::move(ref), nullptr});
    };
    const auto cnt = [&](const char* sec, const char* base, std::function<std::size_t*(Profile&)> ref) {
      f.push_back({sec, base, Kind::kCount, {}, nullptr, std::move(ref)});
    };
    const auto other = [&](const char* sec, const char* base, Kind kind) {
      f.push_back({sec, base, kind, {}, nullptr, nullptr});
    };

    other("", "name", Kind::kText);
    other("", "note", Kind::kText);
    other("", "allow_unstable", Kind::kBool);

    num("resonator", "refractive_index", {}, [](Profile& p) { return &p.params.refractive_index; });
    num("resonator", "radius", {{"_m", 1.0}}, [](Profile& p) { return &p.params.radius; });
    num("resonator", "wavelength", {{"_m", 1.0}}, [](Profile& p) { return &p.params.wavelength; });
    num("resonator", "dn_dlambda", {{"_per_m", 1.0}}, [](Profile& p) { return &p.params.dn_dlambda; });
    num("resonator", "optical_q", {}, [](Profile& p) { return &p.params.optical_q; });
    num("resonator", "kappa", {kRateRads, kRateHz}, [](Profile& p) { return &p.params.kappa; });
    num("resonator", "eta_c", {}, [](Profile& p) { return &p.params.eta_c; });

    num("mechanics", "mass", {{"_kg", 1.0}}, [](Profile& p) { return &p.params.mass; });
    num("mechanics", "mechanical_q", {}, [](Profile& p) { return &p.params.mechanical_q; });
    num("mechanics", "gamma_m", {kRateRads, kRateHz}, [](Profile& p) { return &p.params.gamma_m; });
    f.push_back({"mechanics", "omega_m", Kind::kOptionalNumber, {kRateRads, kRateHz},
                 [](Profile& p) {
                   if (!p.params.omega_m) p.params.omega_m = 0.0;
                   return &*p.params.omega_m;
                 },
                 nullptr});
    num("mechanics", "g0", {kRateRads, kRateHz}, [](Profile& p) { return &p.params.g0; });

    num("drive", "input_power", {{"_w", 1.0}}, [](Profile& p) { return &p.params.input_power; });
    other("drive", "direction", Kind::kDirection);
    num("drive", "nu_rot", {kPlainHz}, [](Profile& p) { return &p.drive.rotation_hz; });
    num("drive", "phi_lo", {{"_rad", 1.0}}, [](Profile& p) { return &p.drive.homodyne_angle; });
    other("drive", "detuning_mode", Kind::kDetuning);

    num("bath", "temperature", {{"_k", 1.0}}, [](Profile& p) { return &p.params.temperature; });

    num("grids", "omega_min", {kPlainHz}, [](Profile& p) { return &p.grids.omega_min_hz; });
    num("grids", "omega_max", {kPlainHz}, [](Profile& p) { return &p.grids.omega_max_hz; });
    cnt("grids", "omega_points", [](Profile& p) { return &p.grids.omega_points; });
    other("grids", "omega_scale", Kind::kScale);
    num("grids", "analysis_omega", {kPlainHz}, [](Profile& p) { return &p.grids.analysis_omega_hz; });
    num("grids", "nu_min", {kPlainHz}, [](Profile& p) { return &p.grids.nu_min_hz; });
    num("grids", "nu_max", {kPlainHz}, [](Profile& p) { return &p.grids.nu_max_hz; });
    cnt("grids", "nu_points", [](Profile& p) { return &p.grids.nu_points; });
    cnt("grids", "phi_points", [](Profile& p) { return &p.grids.phi_points; });
    return f;
  }();
  return table;
}

const std::set<std::string>& sections() {
  static const std::set<std::string> s{"resonator", "mechanics", "drive", "bath", "grids"};
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string units_hint(const Field& f) {
  std::string out;
  for (std::size_t i = 0; i < f.units.size(); ++i) {
    if (i) out += i + 1 == f.units.size() ? " or " : ", ";
    out += f.units[i].suffix;
  }
  return out;
}

std::string qualified(const Field& f) {
  return std::string(*f.section ? "[" + std::string(f.section) + "] " : "") + f.base;
}

class Parser {
 public:
  Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(std::size_t line, const std::string& what) const {
    throw ParseError(source_ + ":" + std::to_string(line) + ": " + what);
  }

  double number(std::size_t line, const std::string& key, const std::string& text) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
      fail(line, "value of '" + key + "' is not a number: '" + text + "'");
    return v;
  }

  std::size_t count(std::size_t line, const std::string& key, const std::string& text) const {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
      fail(line, "value of '" + key + "' is not a non-negative integer: '" + text + "'");
    return v;
  }

 private:
  std::string source_;
};

}  // namespace

void validate(const GridSettings& g) {
  for (double v : {g.omega_min_hz, g.omega_max_hz, g.analysis_omega_hz, g.nu_min_hz, g.nu_max_hz})
    if (!std::isfinite(v)) throw ValidationError("grid bounds must be finite");
  if (!(g.omega_min_hz > 0.0)) throw ValidationError("omega_min_hz must be > 0");
  if (!(g.omega_max_hz > g.omega_min_hz)) throw ValidationError("omega_max_hz must exceed omega_min_hz");
  if (g.omega_points < 2) throw ValidationError("omega_points must be >= 2");
  if (!(g.analysis_omega_hz > 0.0)) throw ValidationError("analysis_omega_hz must be > 0");
  if (!(g.nu_min_hz >= 0.0)) throw ValidationError("nu_min_hz must be >= 0");
  if (!(g.nu_max_hz > g.nu_min_hz)) throw ValidationError("nu_max_hz must exceed nu_min_hz");
  if (g.nu_points < 2) throw ValidationError("nu_points must be >= 2");
  if (g.phi_points < 2) throw ValidationError("phi_points must be >= 2");
}

LoadedProfile parse_profile(const std::string& text, const std::string& source) {
  LoadedProfile out;
  Profile& p = out.profile;
  Parser parser(source);
  std::set<const Field*> seen;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') parser.fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections().count(section)) parser.fail(line_no, "unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) parser.fail(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) parser.fail(line_no, "missing key before '='");

    const Field* match = nullptr;
    double scale = 1.0;
    for (const Field& f : fields()) {
      if (section != f.section) continue;
      if (f.units.empty()) {
        if (key == f.base) match = &f;
      } else {
        if (key == f.base)
          parser.fail(line_no, "key '" + key + "' needs a unit suffix (" + units_hint(f) + ")");
        for (const Unit& u : f.units)
          if (key == std::string(f.base) + u.suffix) {
            match = &f;
            scale = u.scale;
          }
      }
      if (match) break;
    }
    if (!match) {
      const std::string where = section.empty() ? "top level" : "[" + section + "]";
      parser.fail(line_no, "unknown key '" + key + "' in " + where);
    }
    if (!seen.insert(match).second)
      parser.fail(line_no, "'" + qualified(*match) + "' is given more than once");

    switch (match->kind) {
      case Kind::kNumber:
      case Kind::kOptionalNumber: {
        const double v = parser.number(line_no, key, value);
        *match->number(p) = scale == 1.0 ? v : v * scale;
        break;
      }
      case Kind::kCount: *match->count(p) = parser.count(line_no, key, value); break;
      case Kind::kText:
        if (std::string(match->base) == "name") {
          if (value.empty()) parser.fail(line_no, "name must not be empty");
          p.name = value;
        } else {
          p.note = value;
        }
        break;
      case Kind::kBool:
        if (value == "true") p.allow_unstable = true;
        else if (value == "false") p.allow_unstable = false;
        else parser.fail(line_no, "'" + key + "' must be true or false");
        break;
      case Kind::kDirection:
        if (value == "forward") p.drive.direction = Direction::kForward;
        else if (value == "backward") p.drive.direction = Direction::kBackward;
        else parser.fail(line_no, "direction must be forward or backward");
        break;
      case Kind::kDetuning:
        if (value != "compensated") parser.fail(line_no, "detuning_mode must be compensated");
        p.params.detuning_mode = DetuningMode::kCompensated;
        break;
      case Kind::kScale:
        if (value == "log") p.grids.omega_scale = FrequencyGrid::Scale::kLog;
        else if (value == "linear") p.grids.omega_scale = FrequencyGrid::Scale::kLinear;
        else parser.fail(line_no, "omega_scale must be log or linear");
        break;
    }
  }

  if (seen.empty()) {
    out.notices.push_back(source + ": no keys given; using the default profile");
  } else {
    for (const Field& f : fields()) {
      if (seen.count(&f) || f.kind == Kind::kOptionalNumber) continue;
      if (std::string(f.base) == "note") continue;
      out.notices.push_back(source + ": " + qualified(f) + " not given; using the default");
    }
  }

  for (std::string& w : validate(p.params)) out.notices.push_back(source + ": " + w);
  validate(p.drive);
  validate(p.grids);
  return out;
}

LoadedProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open profile '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading profile '" + path.string() + "'");
  return parse_profile(buf.str(), path.string());
}

std::string serialize_profile(const Profile& profile) {
  Profile p = profile;
  std::ostringstream os;
  std::string current;
  for (const Field& f : fields()) {
    if (current != f.section) {
      current = f.section;
      os << "\n[" << current << "]\n";
    }
    const std::string suffix = f.units.empty() ? "" : f.units.front().suffix;
    const std::string key = std::string(f.base) + suffix;
    switch (f.kind) {
      case Kind::kOptionalNumber:
        if (!p.params.omega_m) break;
        [[fallthrough]];
      case Kind::kNumber: os << key << " = " << format_number(*f.number(p)) << "\n"; break;
      case Kind::kCount: os << key << " = " << *f.count(p) << "\n"; break;
      case Kind::kText:
        os << key << " = " << (std::string(f.base) == "name" ? p.name : p.note) << "\n";
        break;
      case Kind::kBool: os << key << " = " << (p.allow_unstable ? "true" : "false") << "\n"; break;
      case Kind::kDirection: os << key << " = " << to_string(p.drive.direction) << "\n"; break;
      case Kind::kDetuning: os << key << " = compensated\n"; break;
      case Kind::kScale:
        os << key << " = " << (p.grids.omega_scale == FrequencyGrid::Scale::kLog ? "log" : "linear")
           << "\n";
        break;
    }
  }
  return os.str();
}

FrequencyGrid omega_grid(const GridSettings& g) {
  validate(g);
  const double lo = constants::kTwoPi * g.omega_min_hz;
  const double hi = constants::kTwoPi * g.omega_max_hz;
  return g.omega_scale == FrequencyGrid::Scale::kLog ? FrequencyGrid::logarithmic(lo, hi, g.omega_points)
                                                     : FrequencyGrid::linear(lo, hi, g.omega_points);
}

std::vector<double> rotation_grid(const GridSettings& g) {
  validate(g);
  std::vector<double> v(g.nu_points);
  const double step = (g.nu_max_hz - g.nu_min_hz) / static_cast<double>(g.nu_points - 1);
  for (std::size_t i = 0; i < g.nu_points; ++i) v[i] = g.nu_min_hz + step * static_cast<double>(i);
  v.back() = g.nu_max_hz;
  return v;
}

std::vector<double> angle_grid(const GridSettings& g) {
  validate(g);
  std::vector<double> v(g.phi_points);
  for (std::size_t k = 0; k < g.phi_points; ++k)
    v[k] = constants::kPi * static_cast<double>(k) / static_cast<double>(g.phi_points);
  return v;
}

}  // namespace spinsense
