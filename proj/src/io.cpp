#include "magnoise/io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "magnoise/format.hpp"

namespace magnoise {

namespace {

using json = nlohmann::ordered_json;

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) {
    throw std::invalid_argument("config: '" + path + "' must be an object");
  }
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* a : allowed) {
      if (it.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      const std::string full =
          path.empty() ? it.key() : path + "." + it.key();
      throw std::invalid_argument("config: unknown key '" + full + "'");
    }
  }
}

double get_number(const json& j, const char* key, double fallback,
                  const std::string& path) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) {
    throw std::invalid_argument("config: '" + path + "." + key +
                                "' must be a number");
  }
  return v.get<double>();
}

Eigen::Index get_index(const json& j, const char* key, Eigen::Index fallback,
                       const std::string& path) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() ||
      (!v.is_number_unsigned() && v.get<std::int64_t>() <= 0)) {
    throw std::invalid_argument("config: '" + path + "." + key +
                                "' must be a positive integer");
  }
  return static_cast<Eigen::Index>(v.get<std::uint64_t>());
}

std::string get_string(const json& j, const char* key,
                       const std::string& fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) {
    throw std::invalid_argument("config: '" + path + "." + key +
                                "' must be a string");
  }
  return v.get<std::string>();
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") +
                                e.what());
  }
  expect_object(j, "(root)");
  check_keys(j, "",
             {"experiment", "noise", "integration", "simulation", "out_dir"});

  static constexpr const char* kMassRequired =
      "m: required (the experiment block must specify the particle mass in "
      "kg)";
  if (!j.contains("experiment")) {
    throw std::invalid_argument(kMassRequired);
  }
  const json& je = j.at("experiment");
  expect_object(je, "experiment");
  check_keys(je, "experiment",
             {"gamma_e", "B0", "I", "d", "rho", "chi_rho", "m", "mu0", "hbar",
              "D_zfs"});
  if (!je.contains("m")) {
    throw std::invalid_argument(kMassRequired);
  }

  RunConfig cfg;
  cfg.experiment = reference_params(get_number(je, "m", 0.0, "experiment"));
  cfg.experiment.gamma_e =
      get_number(je, "gamma_e", cfg.experiment.gamma_e, "experiment");
  cfg.experiment.B0 = get_number(je, "B0", cfg.experiment.B0, "experiment");
  cfg.experiment.I = get_number(je, "I", cfg.experiment.I, "experiment");
  cfg.experiment.d = get_number(je, "d", cfg.experiment.d, "experiment");
  cfg.experiment.rho = get_number(je, "rho", cfg.experiment.rho, "experiment");
  cfg.experiment.chi_rho =
      get_number(je, "chi_rho", cfg.experiment.chi_rho, "experiment");
  cfg.experiment.mu0 = get_number(je, "mu0", cfg.experiment.mu0, "experiment");
  cfg.experiment.hbar =
      get_number(je, "hbar", cfg.experiment.hbar, "experiment");
  cfg.experiment.D_zfs =
      get_number(je, "D_zfs", cfg.experiment.D_zfs, "experiment");
  validate(cfg.experiment);

  if (j.contains("noise")) {
    const json& jn = j.at("noise");
    expect_object(jn, "noise");
    check_keys(jn, "noise", {"type", "A", "K", "alpha", "table_path"});
    cfg.noise.type = get_string(jn, "type", cfg.noise.type, "noise");
    cfg.noise.A = get_number(jn, "A", cfg.noise.A, "noise");
    cfg.noise.K = get_number(jn, "K", cfg.noise.K, "noise");
    cfg.noise.alpha = get_number(jn, "alpha", cfg.noise.alpha, "noise");
    cfg.noise.table_path =
        get_string(jn, "table_path", cfg.noise.table_path, "noise");
  }
  if (cfg.noise.type != "white" && cfg.noise.type != "flicker" &&
      cfg.noise.type != "custom") {
    throw std::invalid_argument(
        "config: noise.type must be 'white', 'flicker', or 'custom'");
  }
  if (cfg.noise.type == "custom" && cfg.noise.table_path.empty()) {
    throw std::invalid_argument(
        "config: noise.table_path is required for custom spectra");
  }
  if (cfg.noise.type == "white") {
    validate(NoiseSpectrum{WhiteNoise{cfg.noise.A}});
  } else if (cfg.noise.type == "flicker") {
    FlickerNoise f;
    f.K = cfg.noise.K;
    f.alpha = cfg.noise.alpha;
    f.I = cfg.experiment.I;
    f.d = cfg.experiment.d;
    validate(NoiseSpectrum{f});
  }

  if (j.contains("integration")) {
    const json& ji = j.at("integration");
    expect_object(ji, "integration");
    check_keys(ji, "integration",
               {"xi_min", "xi_max", "rel_tol", "resonance_halfwidth",
                "max_panels"});
    cfg.integration.xi_min =
        get_number(ji, "xi_min", cfg.integration.xi_min, "integration");
    cfg.integration.xi_max =
        get_number(ji, "xi_max", cfg.integration.xi_max, "integration");
    cfg.integration.rel_tol =
        get_number(ji, "rel_tol", cfg.integration.rel_tol, "integration");
    cfg.integration.resonance_halfwidth =
        get_number(ji, "resonance_halfwidth",
                   cfg.integration.resonance_halfwidth, "integration");
    cfg.integration.max_panels = static_cast<std::size_t>(
        get_index(ji, "max_panels",
                  static_cast<Eigen::Index>(cfg.integration.max_panels),
                  "integration"));
  }
  validate(cfg.integration);

  if (j.contains("simulation")) {
    const json& js = j.at("simulation");
    expect_object(js, "simulation");
    check_keys(js, "simulation",
               {"samples_per_loop", "loops", "seed", "realizations"});
    cfg.simulation.samples_per_loop = get_index(
        js, "samples_per_loop", cfg.simulation.samples_per_loop, "simulation");
    cfg.simulation.loops =
        get_index(js, "loops", cfg.simulation.loops, "simulation");
    if (js.contains("seed")) {
      const json& v = js.at("seed");
      if (!v.is_number_integer() ||
          (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw std::invalid_argument(
            "config: 'simulation.seed' must be a non-negative integer");
      }
      cfg.simulation.seed = v.get<std::uint64_t>();
    }
    cfg.simulation.realizations = static_cast<int>(
        get_index(js, "realizations", cfg.simulation.realizations,
                  "simulation"));
  }
  // Exercises the grid invariants (power-of-two sizes, loop resolution)
  // before any computation begins.
  SimulationGrid::for_system(derive_quantities(cfg.experiment),
                             cfg.simulation.samples_per_loop,
                             cfg.simulation.loops, cfg.simulation.seed);

  cfg.out_dir = get_string(j, "out_dir", cfg.out_dir, "");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  return parse_config(read_file(path));
}

std::string effective_config_json(const RunConfig& cfg) {
  json j;
  j["experiment"] = {{"gamma_e", cfg.experiment.gamma_e},
                     {"B0", cfg.experiment.B0},
                     {"I", cfg.experiment.I},
                     {"d", cfg.experiment.d},
                     {"rho", cfg.experiment.rho},
                     {"chi_rho", cfg.experiment.chi_rho},
                     {"m", cfg.experiment.m},
                     {"mu0", cfg.experiment.mu0},
                     {"hbar", cfg.experiment.hbar},
                     {"D_zfs", cfg.experiment.D_zfs}};
  j["noise"] = {{"type", cfg.noise.type},
                {"A", cfg.noise.A},
                {"K", cfg.noise.K},
                {"alpha", cfg.noise.alpha},
                {"table_path", cfg.noise.table_path}};
  j["integration"] = {
      {"xi_min", cfg.integration.xi_min},
      {"xi_max", cfg.integration.xi_max},
      {"rel_tol", cfg.integration.rel_tol},
      {"resonance_halfwidth", cfg.integration.resonance_halfwidth},
      {"max_panels", cfg.integration.max_panels}};
  j["simulation"] = {{"samples_per_loop", cfg.simulation.samples_per_loop},
                     {"loops", cfg.simulation.loops},
                     {"seed", cfg.simulation.seed},
                     {"realizations", cfg.simulation.realizations}};
  j["out_dir"] = cfg.out_dir;
  return j.dump(2) + "\n";
}

NoiseSpectrum make_spectrum(const RunConfig& cfg) {
  if (cfg.noise.type == "white") {
    return WhiteNoise{cfg.noise.A};
  }
  if (cfg.noise.type == "flicker") {
    FlickerNoise f;
    f.K = cfg.noise.K;
    f.alpha = cfg.noise.alpha;
    f.I = cfg.experiment.I;
    f.d = cfg.experiment.d;
    return f;
  }
  return load_custom_table(cfg.noise.table_path);
}

std::string trace_csv(const NoiseRealization& real,
                      const TrajectoryDeviation& dev) {
  if (real.grid.n != dev.grid.n || real.grid.dt != dev.grid.dt) {
    throw std::invalid_argument(
        "trace_csv: realization and deviation grids disagree");
  }
  const Eigen::ArrayXd t = real.grid.times();
  std::string out = "t,deta,dx_R,dx_L,dp_R,dp_L\n";
  for (Eigen::Index i = 0; i < real.grid.n; ++i) {
    out += format_sci(t[i]);
    out += ',';
    out += format_sci(real.values[i]);
    out += ',';
    out += format_sci(dev.dx_R[i]);
    out += ',';
    out += format_sci(dev.dx_L[i]);
    out += ',';
    out += format_sci(dev.dp_R[i]);
    out += ',';
    out += format_sci(dev.dp_L[i]);
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("io: cannot open '" + path + "' for writing");
  }
  f << contents;
  if (!f) {
    throw std::runtime_error("io: failed while writing '" + path + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("io: cannot read '" + path + "'");
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace magnoise
