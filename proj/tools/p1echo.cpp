/* Copyright 2026 The p1echo Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// p1echo command-line front end.
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "p1echo/io.hpp"
#include "p1echo/p1echo.hpp"

namespace fs = std::filesystem;
using namespace p1echo;

namespace {

/// Invalid user input; reported with exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_time(std::string s) {
  double scale = 1e-6;
  const auto strip = [&s](std::string_view suffix) {
    if (s.size() > suffix.size() && s.ends_with(suffix)) {
      s.resize(s.size() - suffix.size());
      return true;
    }
    return false;
  };
  if (strip("ns")) scale = 1e-9;
  else if (strip("us")) scale = 1e-6;
  else if (strip("ms")) scale = 1e-3;
  else if (strip("s")) scale = 1.0;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v * scale;
  } catch (const std::exception&) {
    throw ConfigError("malformed time '" + s + "'");
  }
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("malformed " + what + " '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw ConfigError("grid count must be >= 1");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

/// "start:stop:count" with optional units (default us), or a single time.
std::vector<double> parse_tau_grid(const std::string& s) {
  const auto f = split(s, ':');
  if (f.size() == 1) return {parse_time(f[0])};
  if (f.size() != 3) throw ConfigError("tau grid must be start:stop:count, got '" + s + "'");
  const double count = parse_number(f[2], "tau count");
  auto v = linspace(parse_time(f[0]), parse_time(f[1]), static_cast<int>(count));
  for (double t : v)
    if (t < 0.0) throw ConfigError("tau must be >= 0");
  return v;
}

/// "start:stop:count", a comma list, or one value (gauss).
std::vector<double> parse_field_list(const std::string& s) {
  std::vector<double> v;
  if (s.find(':') != std::string::npos) {
    const auto f = split(s, ':');
    if (f.size() != 3) throw ConfigError("field list must be start:stop:count, got '" + s + "'");
    v = linspace(parse_number(f[0], "field"), parse_number(f[1], "field"),
                 static_cast<int>(parse_number(f[2], "field count")));
  } else {
    for (const auto& x : split(s, ','))
      if (!x.empty()) v.push_back(parse_number(x, "field"));
  }
  if (v.empty()) throw ConfigError("field list is empty");
  for (double b : v)
    if (b < 0.0) throw ConfigError("field must be ≥ 0");
  return v;
}

struct Common {
  std::string out_dir;
  std::string format = "csv";
  std::string name;
  bool dry_run = false;
  int threads = 1;
};

struct SimOptions {
  std::string central = "p1";
  double b = 72.0;
  std::string b_list;
  std::string tau = "0:30us:150";
  std::uint64_t seed = 1;
  int baths = constants::default_bath_count;
  int spins = constants::default_bath_spins;
  int g = constants::default_group_size;
  double abundance = constants::c13_natural_abundance;
  double min_radius = constants::default_min_radius_nm;
  std::string placement = "lattice";
  std::string sequence = "hahn";
  int n = 1;
  std::string jt = "off-axis-1";
  int m_i = -1;
  bool thermal_n14 = false;
  bool no_nuclear_dipolar = false;
  bool secular = false;
  double hyperfine_scale = 1.0;
  bool per_bath = false;
  std::string fit = "exponential";
  std::string metric = "secular-zz";
};

void add_sim_options(CLI::App* cmd, SimOptions& o, bool with_tau = true) {
  cmd->add_option("--central", o.central, "Central spin: p1, nv or bare")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  cmd->add_option("--spins", o.spins, "13C spins per bath")->capture_default_str();
  cmd->add_option("--abundance", o.abundance, "13C abundance")->capture_default_str();
  cmd->add_option("--min-radius", o.min_radius, "Exclusion radius (nm)")->capture_default_str();
  cmd->add_option("--placement", o.placement, "lattice or continuum")->capture_default_str();
  cmd->add_option("--jt", o.jt, "JT orientation: on-axis, off-axis, off-axis-N")->capture_default_str();
  cmd->add_option("--mi", o.m_i, "Driven 14N projection m_I")->capture_default_str();
  cmd->add_flag("--thermal-n14", o.thermal_n14, "Average over m_I = -1, 0, +1");
  if (!with_tau) return;
  cmd->add_option("--tau", o.tau, "Per-arm delay grid start:stop:count (units us|ns|ms|s)")->capture_default_str();
  cmd->add_option("--baths", o.baths, "Number of baths N_B")->capture_default_str();
  cmd->add_option("--g", o.g, "Maximum group size")->capture_default_str();
  cmd->add_option("--sequence", o.sequence, "Preset (hahn, cpmg, xy8), DSL text or @file.seq")->capture_default_str();
  cmd->add_option("--n", o.n, "Preset repetition count")->capture_default_str();
  cmd->add_flag("--no-nuclear-dipolar", o.no_nuclear_dipolar, "Drop 13C-13C couplings");
  cmd->add_flag("--secular", o.secular, "Secular hyperfine only");
  cmd->add_option("--hyperfine-scale", o.hyperfine_scale, "Scale electron-13C couplings")->capture_default_str();
  cmd->add_flag("--per-bath", o.per_bath, "Emit one column per bath");
  cmd->add_option("--fit", o.fit, "Envelope fit: exponential, gaussian or none")->capture_default_str();
  cmd->add_option("--metric", o.metric, "Clustering metric: secular-zz or tensor-norm")->capture_default_str();
}

CentralSpec make_central(const SimOptions& o) {
  if (o.central == "p1") {
    P1Central c;
    try {
      c.jt = JtOrientation::from_label(parse_jt_label(o.jt));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    if (o.m_i < -1 || o.m_i > 1) throw ConfigError("m_I must be -1, 0 or +1");
    c.m_i = o.m_i;
    c.thermal_n14 = o.thermal_n14;
    return c;
  }
  if (o.central == "nv") return NVCentral{};
  if (o.central == "bare") return BareElectronCentral{};
  throw ConfigError("unknown central spin '" + o.central + "' (expected p1, nv or bare)");
}

PulseProgram make_sequence(const SimOptions& o) {
  if (o.n < 1) throw ConfigError("--n must be >= 1");
  try {
    if (o.sequence == "hahn" || o.sequence == "cpmg" || o.sequence == "xy8" || o.sequence == "deer")
      return expand_preset(o.sequence, o.n);
    if (!o.sequence.empty() && o.sequence[0] == '@') {
      std::ifstream in(o.sequence.substr(1));
      if (!in) throw ConfigError("cannot read sequence file '" + o.sequence.substr(1) + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      return parse_sequence(ss.str(), o.sequence.substr(1));
    }
    return parse_sequence(o.sequence, "custom");
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

SimulationConfig make_config(const SimOptions& o, const Common& common, bool need_tau = true) {
  if (!(o.b >= 0.0)) throw ConfigError("field must be ≥ 0");
  if (o.spins < 0) throw ConfigError("--spins must be >= 0");
  if (!(o.abundance > 0.0 && o.abundance <= 1.0)) throw ConfigError("--abundance must lie in (0, 1]");
  if (o.baths < 1) throw ConfigError("--baths must be >= 1");
  if (o.g < 1) throw ConfigError("--g must be >= 1");
  if (o.placement != "lattice" && o.placement != "continuum") throw ConfigError("--placement must be lattice or continuum");
  if (o.metric != "secular-zz" && o.metric != "tensor-norm") throw ConfigError("--metric must be secular-zz or tensor-norm");
  if (common.threads < 1) throw ConfigError("--threads must be >= 1");

  SimulationConfig c;
  c.central = make_central(o);
  c.b_gauss = Vec3(0.0, 0.0, o.b);
  c.bath.n_spins = o.spins;
  c.bath.abundance = o.abundance;
  c.bath.min_radius_nm = o.min_radius;
  c.bath.placement = o.placement == "lattice" ? Placement::lattice : Placement::continuum;
  c.group_size = o.g;
  c.metric = o.metric == "secular-zz" ? CouplingMetric::secular_zz : CouplingMetric::tensor_norm;
  c.n_baths = o.baths;
  c.master_seed = o.seed;
  c.system.nuclear_dipolar = !o.no_nuclear_dipolar;
  c.system.secular_hyperfine = o.secular;
  c.system.hyperfine_scale = o.hyperfine_scale;
  c.keep_per_bath = o.per_bath;
  c.threads = common.threads;
  if (need_tau) {
    c.tau_grid = parse_tau_grid(o.tau);
    c.sequence = make_sequence(o);
  }
  return c;
}

std::optional<EnvelopeModel> fit_model(const std::string& s) {
  if (s == "none") return std::nullopt;
  if (s == "exponential") return EnvelopeModel::exponential;
  if (s == "gaussian") return EnvelopeModel::gaussian;
  throw ConfigError("--fit must be exponential, gaussian or none");
}

/// Writes to <out_dir>/<name>.<ext>, or stdout without an output directory.
void emit(const Common& c, const std::string& default_name, const std::string& body) {
  if (c.out_dir.empty()) {
    std::cout << body;
    if (!body.empty() && body.back() != '\n') std::cout << '\n';
    return;
  }
  fs::create_directories(c.out_dir);
  const fs::path path = fs::path(c.out_dir) / ((c.name.empty() ? default_name : c.name) + "." + c.format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
  if (!body.empty() && body.back() != '\n') out << '\n';
  std::cerr << "wrote " << path.string() << "\n";
}

void dry_run(const io::json& resolved) {
  io::json j;
  j["schema_version"] = io::schema_version;
  j["resolved"] = resolved;
  j["constants"] = io::constants_table();
  std::cout << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p1echo: central-spin echo simulations of P1 and NV centres in a 13C bath"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI/TOML configuration file (flags override file values)");

  Common common;
  if (const char* env = std::getenv("P1ECHO_OUT_DIR")) common.out_dir = env;
  app.add_option("--out", common.out_dir, "Output directory (default $P1ECHO_OUT_DIR, else stdout)");
  app.add_option("--format", common.format, "csv or json")->capture_default_str();
  app.add_option("--name", common.name, "Output file stem (default: command name)");
  app.add_option("--threads", common.threads, "Worker threads (wall time only)")->capture_default_str();
  app.add_flag("--dry-run", common.dry_run, "Validate and print the resolved configuration");

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "P1 transition table");
  double spec_b = 72.0;
  std::string spec_jt = "all";
  std::vector<double> spec_dir{0.0, 0.0, 1.0};
  spectrum->add_option("--b", spec_b, "Field magnitude (G)")->capture_default_str();
  spectrum->add_option("--b-dir", spec_dir, "Field direction (lab frame)")->expected(3);
  spectrum->add_option("--jt", spec_jt, "on-axis, off-axis, off-axis-N or all")->capture_default_str();

  // echo / scan
  SimOptions echo_o, scan_o, larmor_o;
  auto* echo = app.add_subcommand("echo", "Ensemble echo curve");
  echo->add_option("--b", echo_o.b, "Field along z (G)")->capture_default_str();
  add_sim_options(echo, echo_o);

  auto* scan = app.add_subcommand("scan", "Echo curves over a list of fields");
  scan->add_option("--b", scan_o.b_list, "Fields: start:stop:count or comma list (G)")->required();
  add_sim_options(scan, scan_o);

  auto* larmor = app.add_subcommand("larmor-dist", "State-conditional 13C Larmor frequencies");
  larmor->add_option("--b", larmor_o.b, "Field along z (G)")->capture_default_str();
  add_sim_options(larmor, larmor_o, false);
  int larmor_bins = 1000;
  larmor->add_option("--max-bins", larmor_bins, "Bin cap for Freedman-Diaconis")->capture_default_str();

  // stats
  auto* stats = app.add_subcommand("stats", "Closed-form ensemble statistics");
  double ppm = constants::td_reference_ppm, angular = 0.5, td_us = constants::td_reference_s * 1e6;
  int k = 1;
  std::optional<double> theta_deg;
  stats->add_option("--ppm", ppm, "Defect concentration (ppm)")->capture_default_str();
  stats->add_option("--k", k, "Neighbour index")->capture_default_str();
  stats->add_option("--angular-factor", angular, "1 - 3 cos^2(theta)")->capture_default_str();
  stats->add_option("--theta-deg", theta_deg, "Angle instead of an angular factor");
  stats->add_option("--td-us", td_us, "Instantaneous-diffusion time T_D (us)")->capture_default_str();

  // parse
  auto* parse = app.add_subcommand("parse", "Parse a pulse sequence and print its canonical form");
  std::string check_file, text;
  std::optional<double> parse_tau;
  parse->add_option("--check", check_file, "Sequence file (.seq)");
  parse->add_option("text", text, "Sequence text or preset name");
  parse->add_option("--tau", parse_tau, "Also print the schedule at this tau (us)");

  app.add_subcommand("dump-constants", "Print the constants table (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (common.format != "csv" && common.format != "json") throw ConfigError("--format must be csv or json");

    if (app.got_subcommand("dump-constants")) {
      std::cout << io::constants_table().dump(2) << "\n";
      return 0;
    }

    if (app.got_subcommand(spectrum)) {
      if (!(spec_b >= 0.0)) throw ConfigError("field must be ≥ 0");
      Vec3 dir(spec_dir[0], spec_dir[1], spec_dir[2]);
      if (!(dir.norm() > 0.0)) throw ConfigError("--b-dir must be non-zero");
      std::vector<JtOrientation> jts;
      if (spec_jt == "all") {
        for (auto l : {JtLabel::on_axis, JtLabel::off_axis_1, JtLabel::off_axis_2, JtLabel::off_axis_3})
          jts.push_back(JtOrientation::from_label(l));
      } else {
        try {
          jts.push_back(JtOrientation::from_label(parse_jt_label(spec_jt)));
        } catch (const Error& e) {
          throw ConfigError(e.what());
        }
      }
      const Vec3 b = spec_b * dir.normalized();
      if (common.dry_run) {
        dry_run({{"command", "spectrum"}, {"b_gauss", io::vec3_json(b)}, {"jt", spec_jt}});
        return 0;
      }
      const auto table = transition_table(P1Params{}, b, jts);
      emit(common, "spectrum", common.format == "csv" ? io::transition_csv(table) : io::transition_json(table).dump(2));
      return 0;
    }

    if (app.got_subcommand(echo)) {
      const auto cfg = make_config(echo_o, common);
      const auto model = fit_model(echo_o.fit);
      if (common.dry_run) {
        dry_run(io::config_json(cfg));
        return 0;
      }
      const auto curve = ensemble_signal(cfg);
      std::optional<FitResult> fit;
      if (model) {
        try {
          fit = fit_t2(curve.tau, curve.signal, *model, larmor_frequency(echo_o.b).period_s);
        } catch (const Error& e) {
          std::cerr << "warning: no envelope fit: " << e.what() << "\n";
        }
      }
      emit(common, "echo", common.format == "csv" ? io::echo_csv(curve, echo_o.per_bath) : io::echo_json(curve, fit).dump(2));
      return 0;
    }

    if (app.got_subcommand(scan)) {
      const auto fields = parse_field_list(scan_o.b_list);
      const auto cfg = make_config(scan_o, common);
      if (common.dry_run) {
        auto j = io::config_json(cfg);
        j["fields_gauss"] = fields;
        dry_run(j);
        return 0;
      }
      const auto curves = field_scan(cfg, fields);
      emit(common, "scan", common.format == "csv" ? io::scan_csv(curves) : io::scan_json(curves).dump(2));
      return 0;
    }

    if (app.got_subcommand(larmor)) {
      const auto cfg = make_config(larmor_o, common, false);
      if (larmor_bins < 1) throw ConfigError("--max-bins must be >= 1");
      if (common.dry_run) {
        dry_run(io::config_json(cfg));
        return 0;
      }
      const Bath bath = generate_bath(child_seed(cfg.master_seed, 0), cfg.bath);
      const auto hist = larmor_distribution(cfg.central, bath, cfg.b_gauss, larmor_bins);
      emit(common, "larmor", common.format == "csv" ? io::larmor_csv(hist) : io::larmor_json(hist).dump(2));
      return 0;
    }

    if (app.got_subcommand(stats)) {
      if (!(ppm > 0.0)) throw ConfigError("--ppm must be > 0");
      if (k < 1) throw ConfigError("--k must be >= 1");
      if (!(td_us > 0.0)) throw ConfigError("--td-us must be > 0");
      if (theta_deg) {
        const double c = std::cos(*theta_deg * constants::pi / 180.0);
        angular = 1.0 - 3.0 * c * c;
      }
      if (common.dry_run) {
        dry_run({{"command", "stats"}, {"ppm", ppm}, {"k", k}, {"angular_factor", angular}, {"td_us", td_us}});
        return 0;
      }
      const double n = ppm_to_density_cm3(ppm);
      const double r = mean_kth_distance(n, k);
      io::json j;
      j["schema_version"] = io::schema_version;
      j["ppm"] = ppm;
      j["density_cm3"] = n;
      j["k"] = k;
      j["mean_kth_distance_nm"] = r;
      j["angular_factor"] = angular;
      j["mean_dipolar_coupling_kHz"] = dipolar_coupling_khz(r, angular);
      j["td_us"] = td_us;
      j["concentration_from_td_ppm"] = concentration_from_td(td_us * 1e-6);
      if (common.format == "json") {
        emit(common, "stats", j.dump(2));
      } else {
        std::ostringstream os;
        os << "quantity,value\n";
        for (const auto& [key, v] : j.items())
          if (v.is_number()) os << key << "," << io::fmt17(v.get<double>()) << "\n";
        emit(common, "stats", os.str());
      }
      return 0;
    }

    if (app.got_subcommand(parse)) {
      std::string src = text;
      std::string label = "inline";
      if (!check_file.empty()) {
        std::ifstream in(check_file);
        if (!in) throw ConfigError("cannot read '" + check_file + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        src = ss.str();
        label = check_file;
      }
      if (src.empty()) throw ConfigError("nothing to parse (give text or --check FILE)");
      PulseProgram prog;
      try {
        prog = (src == "hahn" || src == "cpmg" || src == "xy8" || src == "deer") ? expand_preset(src)
                                                                              : parse_sequence(src, label);
      } catch (const Error& e) {
        throw ConfigError(label + ": " + e.what());
      }
      std::cout << print_program(prog) << "\n";
      if (parse_tau) {
        const auto s = compile_schedule(prog, *parse_tau * 1e-6);
        for (const auto& ev : s.events) {
          if (const auto* r = std::get_if<RotationEvent>(&ev))
            std::cout << "rotate " << axis_name(r->axis) << " " << io::fmt17(r->angle)
                      << (r->target.empty() ? "" : " target=" + r->target) << "\n";
          else
            std::cout << "evolve " << io::fmt17(std::get<EvolutionEvent>(ev).duration * 1e6) << " us\n";
        }
        std::cout << "total " << io::fmt17(s.total_time * 1e6) << " us\n";
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
