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

#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "p1echo/bath.hpp"
#include "p1echo/constants.hpp"
#include "p1echo/dynamics.hpp"
#include "p1echo/echo_analysis.hpp"
#include "p1echo/spectroscopy.hpp"
#include "p1echo/statistics.hpp"

// CSV and JSON serialization. CSV numbers use 17 significant digits; JSON
// numbers use the shortest representation that reads back to the same double.
// Every JSON document carries a schema_version.
namespace p1echo::io {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// ---------------------------------------------------------------------------
// Constants and configuration
// ---------------------------------------------------------------------------

inline json constants_table() {
  namespace c = constants;
  json j;
  j["schema_version"] = schema_version;
  j["units"] = {{"hamiltonian", "Hz"}, {"time", "s (us at I/O)"}, {"field", "G"}, {"length", "nm"}};
  j["si"] = {{"mu0_T_m_per_A", c::mu0}, {"planck_J_s", c::planck}, {"hbar_J_s", c::hbar},
             {"tesla_per_gauss", c::tesla_per_gauss}};
  j["p1"] = {{"gamma_e_MHz_per_G", c::gamma_e_mhz_per_g}, {"gamma_n14_Hz_per_G", c::gamma_n14_hz_per_g},
             {"a_par_MHz", c::p1_a_par_mhz}, {"a_perp_MHz", c::p1_a_perp_mhz},
             {"quadrupole_MHz", c::p1_quadrupole_mhz}};
  j["nv"] = {{"d_zfs_MHz", c::nv_zero_field_mhz}, {"gamma_e_MHz_per_G", c::gamma_e_mhz_per_g}};
  j["c13"] = {{"gamma_Hz_per_G", c::gamma_c13_hz_per_g}, {"natural_abundance", c::c13_natural_abundance}};
  j["diamond"] = {{"lattice_constant_nm", c::diamond_lattice_nm},
                  {"atom_density_cm3", c::diamond_atom_density_cm3},
                  {"bond_length_nm", lattice::bond_length_nm()},
                  {"tetrahedral_angle_deg", c::tetrahedral_angle_deg}};
  j["instantaneous_diffusion"] = {{"kappa_ppm_us", td_kappa_ppm_us},
                                  {"reference_td_us", c::td_reference_s * 1e6},
                                  {"reference_ppm", c::td_reference_ppm}};
  j["defaults"] = {{"bath_spins", c::default_bath_spins}, {"group_size", c::default_group_size},
                   {"bath_count", c::default_bath_count}, {"min_radius_nm", c::default_min_radius_nm}};
  return j;
}

inline json central_json(const CentralSpec& c) {
  json j;
  j["kind"] = central_kind(c);
  if (const auto* p1 = std::get_if<P1Central>(&c)) {
    j["jt"] = to_string(p1->jt.label);
    j["n14"] = p1->thermal_n14 ? json("thermal") : json(p1->m_i);
    j["params"] = {{"gamma_e_MHz_per_G", p1->params.gamma_e_mhz_per_g},
                   {"gamma_n14_Hz_per_G", p1->params.gamma_n14_hz_per_g},
                   {"a_par_MHz", p1->params.a_par_mhz},
                   {"a_perp_MHz", p1->params.a_perp_mhz},
                   {"q_MHz", p1->params.q_mhz}};
  } else if (const auto* nv = std::get_if<NVCentral>(&c)) {
    j["params"] = {{"d_zfs_MHz", nv->params.d_zfs_mhz}, {"gamma_e_MHz_per_G", nv->params.gamma_e_mhz_per_g}};
  } else if (const auto* e = std::get_if<BareElectronCentral>(&c)) {
    j["params"] = {{"gamma_e_MHz_per_G", e->gamma_e_mhz_per_g}};
  }
  return j;
}

inline json config_json(const SimulationConfig& c) {
  json j;
  j["central"] = central_json(c.central);
  j["b_gauss"] = vec3_json(c.b_gauss);
  j["bath"] = {{"n_spins", c.bath.n_spins},
               {"abundance", c.bath.abundance},
               {"min_radius_nm", c.bath.min_radius_nm},
               {"placement", to_string(c.bath.placement)}};
  j["group_size"] = c.group_size;
  j["coupling_metric"] = c.metric == CouplingMetric::secular_zz ? "secular-zz" : "tensor-norm";
  j["n_baths"] = c.n_baths;
  j["master_seed"] = c.master_seed;
  j["sequence"] = {{"name", c.sequence.name}, {"text", print_program(c.sequence)}};
  j["system"] = {{"nuclear_dipolar", c.system.nuclear_dipolar},
                 {"secular_hyperfine", c.system.secular_hyperfine},
                 {"hyperfine_scale", c.system.hyperfine_scale}};
  j["tau_points"] = c.tau_grid.size();
  return j;
}

// ---------------------------------------------------------------------------
// Baths
// ---------------------------------------------------------------------------

inline json bath_json(const Bath& b) {
  json j;
  j["schema_version"] = schema_version;
  j["seed"] = b.seed;
  j["abundance"] = b.params.abundance;
  j["n_spins"] = b.params.n_spins;
  j["min_radius_nm"] = b.params.min_radius_nm;
  j["placement"] = to_string(b.params.placement);
  json spins = json::array();
  for (const auto& s : b.spins) spins.push_back({{"position_nm", vec3_json(s.position_nm)}, {"gamma_Hz_per_G", s.gamma_hz_per_g}});
  j["spins"] = spins;
  return j;
}

inline Bath bath_from_json(const json& j) {
  if (j.value("schema_version", 0) != schema_version) throw Error("unsupported bath schema_version");
  Bath b;
  b.seed = j.at("seed").get<std::uint64_t>();
  b.params.abundance = j.at("abundance").get<double>();
  b.params.n_spins = j.at("n_spins").get<int>();
  b.params.min_radius_nm = j.at("min_radius_nm").get<double>();
  b.params.placement = j.at("placement").get<std::string>() == "continuum" ? Placement::continuum : Placement::lattice;
  for (const auto& s : j.at("spins"))
    b.spins.push_back({vec3_from_json(s.at("position_nm")), s.at("gamma_Hz_per_G").get<double>()});
  if (static_cast<int>(b.spins.size()) != b.params.n_spins) throw Error("bath spin count does not match n_spins");
  return b;
}

// ---------------------------------------------------------------------------
// Echo curves
// ---------------------------------------------------------------------------

/// Columns tau_us, signal, then bath_<k> per bath when requested and kept.
inline std::string echo_csv(const EchoCurve& c, bool per_bath = false) {
  std::ostringstream os;
  os << "tau_us,signal";
  const bool extra = per_bath && !c.per_bath.empty();
  if (extra)
    for (std::size_t b = 0; b < c.per_bath.size(); ++b) os << ",bath_" << b;
  os << "\n";
  for (std::size_t i = 0; i < c.tau.size(); ++i) {
    os << fmt17(c.tau[i] * 1e6) << "," << fmt17(c.signal[i]);
    if (extra)
      for (const auto& row : c.per_bath) os << "," << fmt17(row[i]);
    os << "\n";
  }
  return os.str();
}

inline json fit_json(const FitResult& f) {
  json j;
  j["t2_us"] = f.t2 * 1e6;
  j["model"] = to_string(f.model);
  j["residual_norm"] = f.residual_norm;
  json rt = json::array();
  for (double t : f.revival_times) rt.push_back(t * 1e6);
  j["revival_times_us"] = rt;
  return j;
}

inline json echo_json(const EchoCurve& c, const std::optional<FitResult>& fit = {}) {
  json j;
  j["schema_version"] = schema_version;
  j["config"] = config_json(c.config);
  json seeds = json::array();
  for (auto s : c.bath_seeds) seeds.push_back(s);
  j["bath_seeds"] = seeds;
  json tau = json::array(), sig = json::array();
  for (std::size_t i = 0; i < c.tau.size(); ++i) {
    tau.push_back(c.tau[i] * 1e6);
    sig.push_back(c.signal[i]);
  }
  j["tau_us"] = tau;
  j["signal"] = sig;
  if (!c.per_bath.empty()) j["per_bath"] = c.per_bath;
  if (fit) j["fit"] = fit_json(*fit);
  return j;
}

/// Long format: B_gauss, tau_us, signal.
inline std::string scan_csv(const std::vector<EchoCurve>& curves) {
  std::ostringstream os;
  os << "B_gauss,tau_us,signal\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.tau.size(); ++i)
      os << fmt17(c.config.b_gauss.norm()) << "," << fmt17(c.tau[i] * 1e6) << "," << fmt17(c.signal[i]) << "\n";
  return os.str();
}

inline json scan_json(const std::vector<EchoCurve>& curves) {
  json j;
  j["schema_version"] = schema_version;
  j["config"] = curves.empty() ? json() : config_json(curves.front().config);
  json rows = json::array();
  for (const auto& c : curves) {
    json sig = json::array();
    for (double s : c.signal) sig.push_back(s);
    rows.push_back({{"B_gauss", c.config.b_gauss.norm()}, {"signal", sig}});
  }
  json tau = json::array();
  if (!curves.empty())
    for (double t : curves.front().tau) tau.push_back(t * 1e6);
  j["tau_us"] = tau;
  j["fields"] = rows;
  return j;
}

// ---------------------------------------------------------------------------
// Spectroscopy
// ---------------------------------------------------------------------------

inline std::string transition_csv(const TransitionTable& t) {
  std::ostringstream os;
  os << "jt,freq_MHz,from,to,from_label,to_label,kind,moment\n";
  for (const auto& r : t.rows)
    os << to_string(r.jt) << "," << fmt17(r.freq_mhz) << "," << r.from << "," << r.to << ","
       << r.from_label.str() << "," << r.to_label.str() << "," << to_string(r.kind) << "," << fmt17(r.moment)
       << "\n";
  return os.str();
}

inline json transition_json(const TransitionTable& t) {
  json j;
  j["schema_version"] = schema_version;
  j["b_gauss"] = vec3_json(t.b_gauss);
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"jt", to_string(r.jt)},
                    {"freq_MHz", r.freq_mhz},
                    {"from", r.from},
                    {"to", r.to},
                    {"from_label", r.from_label.str()},
                    {"to_label", r.to_label.str()},
                    {"kind", to_string(r.kind)},
                    {"moment", r.moment}});
  j["rows"] = rows;
  return j;
}

inline json larmor_json(const LarmorHistogram& h) {
  json j;
  j["schema_version"] = schema_version;
  j["bath_seed"] = h.bath_seed;
  j["bare_larmor_Hz"] = h.bare_larmor_hz;
  j["bin_edges_Hz"] = h.bin_edges;
  json br = json::array();
  for (const auto& b : h.branches)
    br.push_back({{"label", b.label},
                  {"mean_Hz", b.mean()},
                  {"variance_Hz2", b.variance()},
                  {"counts", b.counts},
                  {"freqs_Hz", b.freqs_hz},
                  {"flagged", b.flagged}});
  j["branches"] = br;
  return j;
}

/// Columns: bin_lo_Hz, bin_hi_Hz, then one count column per branch.
inline std::string larmor_csv(const LarmorHistogram& h) {
  std::ostringstream os;
  os << "bin_lo_Hz,bin_hi_Hz";
  for (const auto& b : h.branches) os << ",count_" << b.label;
  os << "\n";
  for (std::size_t k = 0; k + 1 < h.bin_edges.size(); ++k) {
    os << fmt17(h.bin_edges[k]) << "," << fmt17(h.bin_edges[k + 1]);
    for (const auto& b : h.branches) os << "," << b.counts[k];
    os << "\n";
  }
  return os.str();
}

}  // namespace p1echo::io
