#include "noisefridge/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "noisefridge/error.hpp"
#include "noisefridge/units.hpp"

namespace noisefridge::cli {
namespace fs = std::filesystem;

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, message) : message),
      line_(line) {}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

struct Context {
  int line = 0;
  const std::string& key;
  const fs::path& base_dir;

  [[noreturn]] void fail(const std::string& message) const {
    throw ConfigError(line, fmt::format("{}: {}", key, message));
  }
};

double to_double(const std::string& text, const Context& ctx) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    ctx.fail(fmt::format("'{}' is not a finite number", text));
  }
  return v;
}

long long to_integer(const std::string& text, const Context& ctx) {
  long long v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) ctx.fail(fmt::format("'{}' is not an integer", text));
  return v;
}

using Check = std::function<const char*(double)>;

const Check any = [](double) -> const char* { return nullptr; };
const Check positive = [](double v) -> const char* {
  return v > 0.0 ? nullptr : "must be positive";
};
const Check non_negative = [](double v) -> const char* {
  return v >= 0.0 ? nullptr : "must be non-negative";
};
const Check unit_interval = [](double v) -> const char* {
  return v > 0.0 && v < 1.0 ? nullptr : "must lie strictly between 0 and 1";
};

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&, const Context&)> set;
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

template <typename S>
Field number(const char* section, const char* key, S RunConfig::*sec, double S::*member,
             Check check) {
  return {section, key,
          [=](RunConfig& c, const std::string& text, const Context& ctx) {
            const double v = to_double(text, ctx);
            if (const char* problem = check(v)) ctx.fail(fmt::format("{} (got {})", problem, text));
            c.*sec.*member = v;
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            return format_double(c.*sec.*member);
          }};
}

template <typename S>
Field optional_number(const char* section, const char* key, S RunConfig::*sec,
                      std::optional<double> S::*member, std::optional<double> S::*exclusive,
                      Check check) {
  return {section, key,
          [=](RunConfig& c, const std::string& text, const Context& ctx) {
            const double v = to_double(text, ctx);
            if (const char* problem = check(v)) ctx.fail(fmt::format("{} (got {})", problem, text));
            c.*sec.*member = v;
            (c.*sec.*exclusive).reset();
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            const auto& v = c.*sec.*member;
            if (!v) return std::nullopt;
            return format_double(*v);
          }};
}

template <typename S, typename I>
Field integer(const char* section, const char* key, S RunConfig::*sec, I S::*member,
              long long lo, long long hi) {
  return {section, key,
          [=](RunConfig& c, const std::string& text, const Context& ctx) {
            const long long v = to_integer(text, ctx);
            if (v < lo || v > hi) ctx.fail(fmt::format("must lie in [{}, {}] (got {})", lo, hi, v));
            c.*sec.*member = static_cast<I>(v);
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            return std::to_string(c.*sec.*member);
          }};
}

template <typename S>
Field boolean(const char* section, const char* key, S RunConfig::*sec, bool S::*member) {
  return {section, key,
          [=](RunConfig& c, const std::string& text, const Context& ctx) {
            if (text == "true") {
              c.*sec.*member = true;
            } else if (text == "false") {
              c.*sec.*member = false;
            } else {
              ctx.fail(fmt::format("expected true or false, got '{}'", text));
            }
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            return c.*sec.*member ? "true" : "false";
          }};
}

template <typename S>
Field mode(const char* section, const char* key, S RunConfig::*sec, Mode S::*member) {
  return {section, key,
          [=](RunConfig& c, const std::string& text, const Context& ctx) {
            if (text == "S") {
              c.*sec.*member = Mode::S;
            } else if (text == "A") {
              c.*sec.*member = Mode::A;
            } else {
              ctx.fail(fmt::format("expected S or A, got '{}'", text));
            }
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            return std::string(to_string(c.*sec.*member));
          }};
}

template <typename S>
Field basis(const char* section, const char* key, S RunConfig::*sec, Basis S::*member) {
  return {section, key,
          [=](RunConfig& c, const std::string& text, const Context& ctx) {
            if (text == "site") {
              c.*sec.*member = Basis::Site;
            } else if (text == "mode") {
              c.*sec.*member = Basis::Mode;
            } else {
              ctx.fail(fmt::format("expected site or mode, got '{}'", text));
            }
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            return c.*sec.*member == Basis::Site ? "site" : "mode";
          }};
}

template <typename S>
Field number_list(const char* section, const char* key, S RunConfig::*sec,
                  std::vector<double> S::*member, Check check) {
  return {section, key,
          [=](RunConfig& c, const std::string& text, const Context& ctx) {
            std::vector<double> values;
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) {
              const double v = to_double(trim(item), ctx);
              if (const char* problem = check(v)) ctx.fail(fmt::format("{} (got {})", problem, v));
              values.push_back(v);
            }
            if (values.empty()) ctx.fail("list is empty");
            c.*sec.*member = std::move(values);
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            std::string out;
            for (double v : c.*sec.*member) {
              if (!out.empty()) out += ", ";
              out += format_double(v);
            }
            return out;
          }};
}

template <typename S>
Field input_path(const char* section, const char* key, S RunConfig::*sec,
                 std::string S::*member) {
  return {section, key,
          [=](RunConfig& c, const std::string& text, const Context& ctx) {
            if (text.empty()) {
              (c.*sec.*member).clear();
              return;
            }
            fs::path p(text);
            if (p.is_relative() && !ctx.base_dir.empty()) p = ctx.base_dir / p;
            if (!fs::is_regular_file(p)) ctx.fail(fmt::format("input file '{}' does not exist", p.string()));
            c.*sec.*member = p.lexically_normal().string();
          },
          [=](const RunConfig& c) -> std::optional<std::string> {
            const auto& v = c.*sec.*member;
            if (v.empty()) return std::nullopt;
            return v;
          }};
}

const std::vector<Field>& fields() {
  using D = DeviceSection;
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    const auto dev = &RunConfig::device;
    f.push_back(number("device", "omega_GHz", dev, &D::omega_GHz, positive));
    f.push_back(number("device", "g_MHz", dev, &D::g_MHz, positive));
    f.push_back(number("device", "alpha_MHz", dev, &D::alpha_MHz, any));
    f.push_back(number("device", "gamma_s_MHz", dev, &D::gamma_s_MHz, non_negative));
    f.push_back(number("device", "gamma_a_MHz", dev, &D::gamma_a_MHz, non_negative));
    f.push_back(number("device", "gamma_s_prime_MHz", dev, &D::gamma_s_prime_MHz, non_negative));
    f.push_back(number("device", "gamma_a_prime_MHz", dev, &D::gamma_a_prime_MHz, non_negative));
    f.push_back(number("device", "gamma_phi_MHz", dev, &D::gamma_phi_MHz, non_negative));
    f.push_back(optional_number("device", "T_s_mK", dev, &D::T_s_mK, &D::n_s, positive));
    f.push_back(optional_number("device", "T_a_mK", dev, &D::T_a_mK, &D::n_a, positive));
    f.push_back(optional_number("device", "n_s", dev, &D::n_s, &D::T_s_mK, non_negative));
    f.push_back(optional_number("device", "n_a", dev, &D::n_a, &D::T_a_mK, non_negative));
    f.push_back(integer("device", "levels", dev, &D::levels, 2, 3));
    f.push_back(basis("device", "basis", dev, &D::basis));
    f.push_back(boolean("device", "include_parasitic", dev, &D::include_parasitic));

    const auto run = &RunConfig::run;
    f.push_back(integer("run", "seed", run, &RunSection::seed, 0,
                        std::numeric_limits<long long>::max()));
    f.push_back(integer("run", "threads", run, &RunSection::threads, 1, 256));
    f.push_back({"run", "output_dir",
                 [](RunConfig& c, const std::string& text, const Context& ctx) {
                   if (text.empty()) ctx.fail("must not be empty");
                   c.run.output_dir = text;
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return c.run.output_dir; }});

    using H = HeatSweepSection;
    const auto hs = &RunConfig::heat_sweep;
    f.push_back(number("heat_sweep", "T_s_mK", hs, &H::T_s_mK, positive));
    f.push_back(number("heat_sweep", "T_a_start_mK", hs, &H::T_a_start_mK, positive));
    f.push_back(number("heat_sweep", "T_a_stop_mK", hs, &H::T_a_stop_mK, positive));
    f.push_back(number("heat_sweep", "T_a_step_mK", hs, &H::T_a_step_mK, positive));
    f.push_back(number("heat_sweep", "boundary_tolerance", hs, &H::boundary_tolerance, unit_interval));

    using C = CopVsGSection;
    const auto cg = &RunConfig::cop_vs_g;
    f.push_back(number("cop_vs_g", "T_s_mK", cg, &C::T_s_mK, positive));
    f.push_back(number("cop_vs_g", "g_start_MHz", cg, &C::g_start_MHz, positive));
    f.push_back(number("cop_vs_g", "g_stop_MHz", cg, &C::g_stop_MHz, positive));
    f.push_back(integer("cop_vs_g", "g_count", cg, &C::g_count, 1, 10000));
    f.push_back(number("cop_vs_g", "reference_ratio", cg, &C::reference_ratio, unit_interval));
    f.push_back(number("cop_vs_g", "inset", cg, &C::inset, unit_interval));

    using Dr = DriveSection;
    const auto dr = &RunConfig::drive;
    f.push_back(number("drive", "rabi_MHz", dr, &Dr::rabi_MHz, non_negative));
    f.push_back(mode("drive", "target", dr, &Dr::target));
    f.push_back(number("drive", "detuning_MHz", dr, &Dr::detuning_MHz, any));
    f.push_back(integer("drive", "levels", dr, &Dr::levels, 2, 3));
    f.push_back(basis("drive", "basis", dr, &Dr::basis));

    using Sp = SpectrumSection;
    const auto sp = &RunConfig::spectrum;
    f.push_back(mode("spectrum", "mode", sp, &Sp::mode));
    f.push_back(number("spectrum", "half_span_MHz", sp, &Sp::half_span_MHz, positive));
    f.push_back(integer("spectrum", "points", sp, &Sp::points, 3, 1000000));

    using T = TransportSection;
    const auto tr = &RunConfig::transport;
    f.push_back(number("transport", "gamma_phi_min_MHz", tr, &T::gamma_phi_min_MHz, positive));
    f.push_back(number("transport", "gamma_phi_max_MHz", tr, &T::gamma_phi_max_MHz, positive));
    f.push_back(integer("transport", "count", tr, &T::count, 1, 100000));
    f.push_back(boolean("transport", "include_zero", tr, &T::include_zero));
    f.push_back(number("transport", "span_MHz", tr, &T::span_MHz, positive));
    f.push_back(integer("transport", "grid_points", tr, &T::grid_points, 3, 1000000));

    using R = ReflectionSection;
    const auto rf = &RunConfig::reflection;
    f.push_back(input_path("reflection", "input", rf, &R::input));
    f.push_back(mode("reflection", "mode", rf, &R::mode));
    f.push_back(number("reflection", "gamma_phi_pure_MHz", rf, &R::gamma_phi_pure_MHz, non_negative));
    f.push_back(number("reflection", "half_span_MHz", rf, &R::half_span_MHz, positive));
    f.push_back(integer("reflection", "points", rf, &R::points, 5, 1000000));
    f.push_back(number_list("reflection", "powers_dBm", rf, &R::powers_dBm, any));
    f.push_back(number("reflection", "power_factor_MHz2_per_mW", rf, &R::power_factor_MHz2_per_mW, positive));
    f.push_back(number("reflection", "noise_sigma", rf, &R::noise_sigma, non_negative));

    using Dp = DephasingSection;
    const auto dp = &RunConfig::dephasing;
    f.push_back(input_path("dephasing", "input", dp, &Dp::input));
    f.push_back(mode("dephasing", "mode", dp, &Dp::mode));
    f.push_back(number_list("dephasing", "noise_powers", dp, &Dp::noise_powers, non_negative));
    f.push_back(number("dephasing", "kappa_MHz", dp, &Dp::kappa_MHz, non_negative));
    f.push_back(number("dephasing", "half_span_MHz", dp, &Dp::half_span_MHz, positive));
    f.push_back(integer("dephasing", "points", dp, &Dp::points, 5, 1000000));
    f.push_back(number("dephasing", "probe_rabi_MHz", dp, &Dp::probe_rabi_MHz, non_negative));
    f.push_back(number("dephasing", "noise_sigma", dp, &Dp::noise_sigma, non_negative));

    using M = MollowSection;
    const auto ml = &RunConfig::mollow;
    f.push_back(input_path("mollow", "input", ml, &M::input));
    f.push_back(number("mollow", "rabi_MHz", ml, &M::rabi_MHz, positive));
    f.push_back(number("mollow", "half_span_MHz", ml, &M::half_span_MHz, non_negative));
    f.push_back(integer("mollow", "points", ml, &M::points, 5, 1000000));
    f.push_back(number("mollow", "noise_sigma", ml, &M::noise_sigma, non_negative));
    return f;
  }();
  return table;
}

// Checks that span several keys; `lines` maps "section.key" to where it was set.
void validate(const RunConfig& c, const std::map<std::string, int>& lines) {
  const auto line_of = [&](const std::string& key) {
    const auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };
  try {
    (void)c.device.params();
  } catch (const Error& e) {
    throw ConfigError(0, fmt::format("[device] {}", e.what()));
  }
  if (c.heat_sweep.T_a_start_mK > c.heat_sweep.T_a_stop_mK) {
    throw ConfigError(line_of("heat_sweep.T_a_stop_mK"),
                      "heat_sweep.T_a_stop_mK: must not be below T_a_start_mK");
  }
  if (c.cop_vs_g.g_start_MHz > c.cop_vs_g.g_stop_MHz) {
    throw ConfigError(line_of("cop_vs_g.g_stop_MHz"),
                      "cop_vs_g.g_stop_MHz: must not be below g_start_MHz");
  }
  if (c.cop_vs_g.g_stop_MHz >= 1e3 * c.device.omega_GHz) {
    throw ConfigError(line_of("cop_vs_g.g_stop_MHz"),
                      "cop_vs_g.g_stop_MHz: must stay below the bare frequency");
  }
  if (c.transport.gamma_phi_min_MHz > c.transport.gamma_phi_max_MHz) {
    throw ConfigError(line_of("transport.gamma_phi_max_MHz"),
                      "transport.gamma_phi_max_MHz: must not be below gamma_phi_min_MHz");
  }
}

}  // namespace

DeviceParams DeviceSection::params() const {
  using namespace units;
  DeviceParams p;
  p.omega = from_ghz(omega_GHz);
  p.g = from_mhz(g_MHz);
  p.alpha = from_mhz(alpha_MHz);
  p.gamma_s = from_mhz(gamma_s_MHz);
  p.gamma_a = from_mhz(gamma_a_MHz);
  p.gamma_s_prime = from_mhz(gamma_s_prime_MHz);
  p.gamma_a_prime = from_mhz(gamma_a_prime_MHz);
  p.gamma_phi = from_mhz(gamma_phi_MHz);
  p.dims = HilbertDims::pair(levels, basis);
  p.validate();
  p.n_s = n_s ? *n_s : occupation_from_temperature(from_millikelvin(T_s_mK.value()), p.omega_s());
  p.n_a = n_a ? *n_a : occupation_from_temperature(from_millikelvin(T_a_mK.value()), p.omega_a());
  return p;
}

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
  std::map<std::string, const Field*> by_name;
  std::set<std::string> sections;
  for (const auto& f : fields()) {
    by_name[f.section + "." + f.key] = &f;
    sections.insert(f.section);
  }

  RunConfig config;
  std::map<std::string, int> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto comment = raw.find_first_of("#;");
    const std::string content = trim(std::string_view(raw).substr(0, comment));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') throw ConfigError(line, "malformed section header");
      section = trim(std::string_view(content).substr(1, content.size() - 2));
      if (!sections.contains(section)) {
        throw ConfigError(line, fmt::format("unknown section [{}]", section));
      }
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (section.empty()) throw ConfigError(line, fmt::format("{}: key outside any section", key));
    const std::string name = section + "." + key;
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw ConfigError(line, fmt::format("unknown key {}", name));
    if (seen.contains(name)) {
      throw ConfigError(line, fmt::format("{}: duplicate key (first set on line {})", name, seen[name]));
    }
    seen[name] = line;
    const Context ctx{line, name, base_dir};
    it->second->set(config, value, ctx);
  }

  for (const auto& [temperature, occupation] :
       {std::pair{"device.T_s_mK", "device.n_s"}, std::pair{"device.T_a_mK", "device.n_a"}}) {
    if (seen.contains(temperature) && seen.contains(occupation)) {
      throw ConfigError(std::max(seen[temperature], seen[occupation]),
                        fmt::format("{} and {} are mutually exclusive", temperature, occupation));
    }
  }
  validate(config, seen);
  return config;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, fmt::format("cannot read config file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

std::string serialize(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += fmt::format("[{}]\n", section);
    }
    if (const auto value = f.get(config)) out += fmt::format("{} = {}\n", f.key, *value);
  }
  return out;
}

}  // namespace noisefridge::cli
