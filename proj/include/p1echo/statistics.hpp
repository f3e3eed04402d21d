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

#include <cmath>
#include <limits>
#include <optional>

#include "p1echo/common.hpp"
#include "p1echo/constants.hpp"

// Closed-form ensemble statistics of randomly placed spins.
namespace p1echo {

/// ppm of lattice sites -> number density in cm^-3.
inline double ppm_to_density_cm3(double ppm) { return ppm * 1e-6 * constants::diamond_atom_density_cm3; }

/// Mean distance to the k-th nearest neighbour of a Poisson point process of
/// density n (cm^-3): (4 pi n / 3)^(-1/3) Gamma(k + 1/3) / Gamma(k), in nm.
inline double mean_kth_distance(double n_cm3, int k) {
  if (!(n_cm3 > 0.0)) throw Error("number density must be > 0");
  if (k < 1) throw Error("neighbour index k must be >= 1");
  const double n_nm3 = n_cm3 * 1e-21;
  const double ratio = std::exp(std::lgamma(k + 1.0 / 3.0) - std::lgamma(static_cast<double>(k)));
  return std::pow(4.0 * constants::pi * n_nm3 / 3.0, -1.0 / 3.0) * ratio;
}

/// Electron-electron dipolar coupling (kHz) at distance r (nm) for a given
/// angular factor 1 - 3 cos^2(theta).
inline double dipolar_coupling_khz(double r_nm, double angular_factor) {
  if (!(r_nm > 0.0)) throw Error("distance must be > 0");
  const double g = constants::gamma_e_mhz_per_g * 1e6;
  return angular_factor * constants::dipolar_prefactor_hz(g, g, r_nm) * 1e-3;
}

/// mu0 gamma_e^2 h (1 - 3 cos^2 theta) / (4 pi r^3) in kHz.
inline double mean_dipolar_coupling(double r_nm, double theta) {
  const double c = std::cos(theta);
  return dipolar_coupling_khz(r_nm, 1.0 - 3.0 * c * c);
}

/// Instantaneous-diffusion calibration constant in ppm us (0.2 ppm at 70 us).
inline constexpr double td_kappa_ppm_us = constants::td_reference_ppm * constants::td_reference_s * 1e6;

/// Linear law [N] = kappa / T_D, evaluated as a ratio to the calibration
/// point so that T_D = 70 us returns 0.2 ppm exactly.
inline double concentration_from_td(double t_d_s) {
  if (!(t_d_s > 0.0)) throw Error("T_D must be > 0");
  return constants::td_reference_ppm * (constants::td_reference_s / t_d_s);
}

struct LarmorFrequency {
  double freq_hz = 0.0;
  std::optional<double> period_s;  // empty at zero field
};

inline LarmorFrequency larmor_frequency(double b_gauss,
                                        double gamma_hz_per_g = constants::gamma_c13_hz_per_g) {
  if (!(b_gauss >= 0.0)) throw Error("field must be >= 0");
  const double f = std::abs(gamma_hz_per_g) * b_gauss;
  return {f, f > 0.0 ? std::optional<double>(1.0 / f) : std::nullopt};
}

}  // namespace p1echo
