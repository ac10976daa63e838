#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "spinsense/core_model.hpp"
#include "spinsense/spectra.hpp"

namespace spinsense {

/// Malformed profile text; the message carries the source and line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Scan settings. Frequencies are cyclic (Hz); omega = 2 pi f internally.
struct GridSettings {
  double omega_min_hz = 10.0;
  double omega_max_hz = 1e7;
  std::size_t omega_points = 400;
  FrequencyGrid::Scale omega_scale = FrequencyGrid::Scale::kLog;
  double analysis_omega_hz = 1e3;
  double nu_min_hz = 0.0;
  double nu_max_hz = 2e4;
  std::size_t nu_points = 100;
  std::size_t phi_points = 180;

  bool operator==(const GridSettings&) const = default;
};

struct Profile {
  std::string name = "default";
  std::string note;
  PhysicalParams params;
  DriveConfig drive;
  GridSettings grids;
  bool allow_unstable = false;  // sweeps mask unstable points instead of failing

  bool operator==(const Profile&) const = default;
};

struct LoadedProfile {
  Profile profile;
  std::vector<std::string> notices;  // defaults applied and consistency warnings
};

/// Parses the `key = value` format with [resonator], [mechanics], [drive],
/// [bath] and [grids] sections. Throws ParseError or ValidationError.
LoadedProfile parse_profile(const std::string& text, const std::string& source = "<profile>");

/// Throws IoError when the file cannot be read.
LoadedProfile load_profile(const std::filesystem::path& path);

/// Text that parse_profile maps back to an identical Profile.
std::string serialize_profile(const Profile& profile);

void validate(const GridSettings& grids);

FrequencyGrid omega_grid(const GridSettings& grids);
/// Rotation rates in Hz, linear from nu_min_hz to nu_max_hz.
std::vector<double> rotation_grid(const GridSettings& grids);
/// Angles k pi / phi_points, k = 0 .. phi_points - 1.
std::vector<double> angle_grid(const GridSettings& grids);

}  // namespace spinsense
