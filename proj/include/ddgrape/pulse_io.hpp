#pragma once

// Text pulse-sequence files:
//
//   # dt_seconds=5.1e-06
//   # omega_max_rad_s=615998.90215...
//   0 <omega_x_rad_s> <omega_y_rad_s> <frozen:0|1>
//   ...
//
// Other `# key=value` comment lines are kept as metadata; any other `#`
// text is ignored. Numbers are written with 17 significant digits so a
// write/read cycle reproduces the doubles exactly.

#include "ddgrape/nmr_model.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace ddgrape {

struct PulseFile {
  PulseSequence pulse;
  std::map<std::string, std::string> metadata;
};

void write_pulse(std::ostream& os, const PulseSequence& pulse,
                 const std::map<std::string, std::string>& metadata = {});
void write_pulse_file(const std::filesystem::path& path, const PulseSequence& pulse,
                      const std::map<std::string, std::string>& metadata = {});

/// Throws ValidationError on malformed input or missing headers.
PulseFile read_pulse(std::istream& is);
PulseFile read_pulse_file(const std::filesystem::path& path);

/// Shortest round-trip decimal text for a double.
std::string format_double(double value);

}  // namespace ddgrape
