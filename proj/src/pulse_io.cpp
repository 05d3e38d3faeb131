#include "ddgrape/pulse_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ddgrape {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("pulse file: cannot parse " + what + " from '" + text + "'");
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_pulse(std::ostream& os, const PulseSequence& pulse,
                 const std::map<std::string, std::string>& metadata) {
  os << "# dt_seconds=" << format_double(pulse.dt) << '\n';
  os << "# omega_max_rad_s=" << format_double(pulse.omega_max) << '\n';
  for (const auto& [k, v] : metadata) os << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < pulse.segments.size(); ++i) {
    const auto& s = pulse.segments[i];
    os << i << ' ' << format_double(s.omega_x) << ' ' << format_double(s.omega_y) << ' '
       << (s.frozen ? 1 : 0) << '\n';
  }
}

void write_pulse_file(const std::filesystem::path& path, const PulseSequence& pulse,
                      const std::map<std::string, std::string>& metadata) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open pulse file for writing: " + path.string());
  write_pulse(os, pulse, metadata);
}

PulseFile read_pulse(std::istream& is) {
  PulseFile out;
  bool have_dt = false;
  bool have_max = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const std::string body = trim(t.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key.empty() || key.find(' ') != std::string::npos) continue;
      if (key == "dt_seconds") {
        out.pulse.dt = parse_double(value, "dt_seconds");
        have_dt = true;
      } else if (key == "omega_max_rad_s") {
        out.pulse.omega_max = parse_double(value, "omega_max_rad_s");
        have_max = true;
      } else {
        out.metadata[key] = value;
      }
      continue;
    }
    std::istringstream row(t.substr(0, t.find('#')));
    std::string idx, ox, oy, fz, extra;
    if (!(row >> idx >> ox >> oy >> fz) || (row >> extra)) {
      throw ValidationError("pulse file: malformed segment row at line " + std::to_string(line_no));
    }
    if (static_cast<std::size_t>(parse_double(idx, "index")) != out.pulse.segments.size())
      throw ValidationError("pulse file: segment index out of order at line " + std::to_string(line_no));
    if (fz != "0" && fz != "1")
      throw ValidationError("pulse file: frozen flag must be 0 or 1 at line " + std::to_string(line_no));
    out.pulse.segments.push_back({parse_double(ox, "omega_x"), parse_double(oy, "omega_y"), fz == "1"});
  }
  if (!have_dt) throw ValidationError("pulse file: missing dt_seconds header");
  if (!have_max) throw ValidationError("pulse file: missing omega_max_rad_s header");
  out.pulse.validate();
  return out;
}

PulseFile read_pulse_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open pulse file: " + path.string());
  return read_pulse(is);
}

}  // namespace ddgrape
