#include "raceway/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "raceway/errors.hpp"

namespace raceway {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() ||
      !std::isfinite(v)) {
    throw InvalidInput("invalid number \"" + std::string(text) + "\" for " +
                       std::string(key));
  }
  return v;
}

std::uint64_t parse_count(std::string_view key, std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    // Accept integral values written in floating notation, e.g. budget=1e9.
    const double d = parse_double(key, text);
    if (d < 0 || d != std::floor(d) || d > 1.8e19) {
      throw InvalidInput("invalid non-negative integer \"" + std::string(text) +
                         "\" for " + std::string(key));
    }
    return static_cast<std::uint64_t>(d);
  }
  return v;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_grid(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += format_g17(values[i]);
  }
  return s;
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::optimize: return "optimize";
    case Mode::sweep: return "sweep";
    case Mode::ratios: return "ratios";
    case Mode::simulate: return "simulate";
  }
  return "optimize";
}

Mode parse_mode(std::string_view text) {
  text = trim(text);
  if (text == "optimize") return Mode::optimize;
  if (text == "sweep") return Mode::sweep;
  if (text == "ratios") return Mode::ratios;
  if (text == "simulate") return Mode::simulate;
  throw InvalidInput("unknown mode \"" + std::string(text) +
                     "\" (expected optimize, sweep, ratios or simulate)");
}

std::vector<double> parse_grid(std::string_view spec) {
  spec = trim(spec);
  if (spec.empty()) throw InvalidInput("empty grid specification");

  const bool lin = spec.starts_with("lin:");
  const bool log = spec.starts_with("log:");
  if (lin || log) {
    std::vector<std::string_view> parts;
    std::string_view rest = spec.substr(4);
    for (std::size_t pos; (pos = rest.find(':')) != std::string_view::npos;) {
      parts.push_back(rest.substr(0, pos));
      rest = rest.substr(pos + 1);
    }
    parts.push_back(rest);
    if (parts.size() != 3) {
      throw InvalidInput("grid \"" + std::string(spec) +
                         "\" must look like lin:a:b:n or log:a:b:n");
    }
    const double a = parse_double("grid start", parts[0]);
    const double b = parse_double("grid end", parts[1]);
    const std::uint64_t n = parse_count("grid size", parts[2]);
    if (n == 0) throw InvalidInput("grid needs at least one point");
    if (log && (a <= 0.0 || b <= 0.0)) {
      throw InvalidInput("log grid endpoints must be positive");
    }
    std::vector<double> out(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      out[i] = lin ? a + t * (b - a)
                   : std::exp(std::log(a) + t * (std::log(b) - std::log(a)));
    }
    // Pin the endpoints exactly.
    out.front() = a;
    if (n > 1) out.back() = b;
    return out;
  }

  std::vector<double> out;
  std::string_view rest = spec;
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(parse_double("grid value", rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

ExperimentConfig ExperimentConfig::defaults(Mode mode) {
  ExperimentConfig c;
  c.mode = mode;
  switch (mode) {
    case Mode::optimize:
    case Mode::simulate:
      break;
    case Mode::sweep:
      c.layers = 7;
      c.surface_intensity = parse_grid("lin:0:2500:26");
      c.bottom_fraction = parse_grid("log:0.001:0.1:41");
      c.lap_time = {1.0, 500.0, 1000.0};
      break;
    case Mode::ratios:
      c.layers = 7;
      c.surface_intensity = parse_grid("lin:0:2500:26");
      c.bottom_fraction = {0.001};
      c.lap_time = parse_grid("log:1:1000:20");
      break;
  }
  return c;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "mode") mode = parse_mode(value);
  else if (key == "k_r") params.k_r = parse_double(key, value);
  else if (key == "k_d") params.k_d = parse_double(key, value);
  else if (key == "tau") params.tau = parse_double(key, value);
  else if (key == "sigma") params.sigma = parse_double(key, value);
  else if (key == "k") params.k = parse_double(key, value);
  else if (key == "R") params.R = parse_double(key, value);
  else if (key == "h") depth = parse_double(key, value);
  else if (key == "N") layers = parse_count(key, value);
  else if (key == "Is") surface_intensity = parse_grid(value);
  else if (key == "q") bottom_fraction = parse_grid(value);
  else if (key == "T") lap_time = parse_grid(value);
  else if (key == "laps") laps = parse_count(key, value);
  else if (key == "perm") perm = std::string(value);
  else if (key == "c0") start = std::string(value);
  else if (key == "workers") workers = parse_count(key, value);
  else if (key == "seed") seed = parse_count(key, value);
  else if (key == "verify_samples") verify_samples = parse_count(key, value);
  else if (key == "budget") budget = parse_count(key, value);
  else if (key == "out") out = std::string(value);
  else if (key == "checkpoint") checkpoint = std::string(value);
  else throw InvalidInput("unknown configuration key \"" + std::string(key) + "\"");
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidInput("line " + std::to_string(line_no) +
                         ": expected key=value, got \"" + std::string(t) + "\"");
    }
    kv[std::string(trim(t.substr(0, eq)))] = std::string(trim(t.substr(eq + 1)));
  }
  return kv;
}

void ExperimentConfig::apply_text(std::string_view text) {
  const auto kv = parse_key_values(text);
  // Mode first so it never depends on map ordering.
  if (const auto it = kv.find("mode"); it != kv.end()) set("mode", it->second);
  for (const auto& [key, value] : kv) {
    if (key != "mode") set(key, value);
  }
}

void ExperimentConfig::validate() const {
  params.validate();
  if (!(depth > 0.0)) throw InvalidInput("h must be > 0");
  if (layers == 0) throw InvalidInput("N must be at least 1");
  if (surface_intensity.empty() || bottom_fraction.empty() || lap_time.empty()) {
    throw InvalidInput("grids must not be empty");
  }
  for (const double v : surface_intensity) {
    if (!(v >= 0.0)) throw InvalidInput("Is values must be >= 0");
  }
  for (const double v : bottom_fraction) {
    if (!(v > 0.0 && v <= 1.0)) throw InvalidInput("q values must lie in (0, 1]");
  }
  for (const double v : lap_time) {
    if (!(v > 0.0)) throw InvalidInput("T values must be > 0");
  }
  if (workers == 0) throw InvalidInput("workers must be at least 1");
  if (mode == Mode::simulate && laps == 0) {
    throw InvalidInput("simulate needs laps >= 1");
  }
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream s;
  s << "mode=" << to_string(mode) << '\n'
    << "k_r=" << format_g17(params.k_r) << '\n'
    << "k_d=" << format_g17(params.k_d) << '\n'
    << "tau=" << format_g17(params.tau) << '\n'
    << "sigma=" << format_g17(params.sigma) << '\n'
    << "k=" << format_g17(params.k) << '\n'
    << "R=" << format_g17(params.R) << '\n'
    << "h=" << format_g17(depth) << '\n'
    << "N=" << layers << '\n'
    << "Is=" << format_grid(surface_intensity) << '\n'
    << "q=" << format_grid(bottom_fraction) << '\n'
    << "T=" << format_grid(lap_time) << '\n'
    << "laps=" << laps << '\n'
    << "perm=" << perm << '\n'
    << "c0=" << start << '\n'
    << "workers=" << workers << '\n'
    << "seed=" << seed << '\n'
    << "verify_samples=" << verify_samples << '\n'
    << "budget=" << budget << '\n'
    << "out=" << out << '\n'
    << "checkpoint=" << checkpoint << '\n';
  return s.str();
}

}  // namespace raceway
