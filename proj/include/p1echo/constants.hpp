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

#include <numbers>

// Every physical constant used by the library lives here so that the CLI can
// dump one auditable table. Gyromagnetic ratios are quoted as gamma/2pi.
namespace p1echo::constants {

inline constexpr double pi = std::numbers::pi;

// SI (CODATA 2018)
inline constexpr double mu0 = 1.25663706212e-6;       // T m / A
inline constexpr double mu0_over_4pi = mu0 / (4.0 * pi);
inline constexpr double planck = 6.62607015e-34;       // J s
inline constexpr double hbar = planck / (2.0 * pi);    // J s

inline constexpr double tesla_per_gauss = 1e-4;
inline constexpr double meters_per_nm = 1e-9;

// P1 centre
inline constexpr double gamma_e_mhz_per_g = -2.8;
inline constexpr double gamma_n14_hz_per_g = 307.7;
inline constexpr double p1_a_par_mhz = 114.0;
inline constexpr double p1_a_perp_mhz = 81.34;
inline constexpr double p1_quadrupole_mhz = -4.2;

// NV centre
inline constexpr double nv_zero_field_mhz = 2870.0;

// 13C bath
inline constexpr double gamma_c13_hz_per_g = 1071.5;
inline constexpr double c13_natural_abundance = 0.011;

// Diamond
inline constexpr double diamond_lattice_nm = 0.3567;
inline constexpr double diamond_atom_density_cm3 = 1.76e23;
inline constexpr double tetrahedral_angle_deg = 109.47122063449069;  // acos(-1/3)

// Simulation defaults
inline constexpr int default_bath_spins = 125;
inline constexpr int default_group_size = 3;
inline constexpr int default_bath_count = 20;
inline constexpr double default_min_radius_nm = 0.154;

// Instantaneous-diffusion calibration: T_D = 70 us  <->  [N0] = 0.2 ppm.
inline constexpr double td_reference_s = 70e-6;
inline constexpr double td_reference_ppm = 0.2;

/// Prefactor of a point-dipole coupling in Hz for two gyromagnetic ratios
/// given in Hz/G and a separation in nm: (mu0/4pi) * g1 * g2 * h / r^3.
inline constexpr double dipolar_prefactor_hz(double gamma1_hz_per_g, double gamma2_hz_per_g,
                                             double r_nm) {
  const double g1 = gamma1_hz_per_g / tesla_per_gauss;
  const double g2 = gamma2_hz_per_g / tesla_per_gauss;
  const double r = r_nm * meters_per_nm;
  return mu0_over_4pi * g1 * g2 * planck / (r * r * r);
}

}  // namespace p1echo::constants
