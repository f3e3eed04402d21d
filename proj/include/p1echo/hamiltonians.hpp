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

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "p1echo/common.hpp"
#include "p1echo/constants.hpp"
#include "p1echo/lattice.hpp"
#include "p1echo/spin_core.hpp"

// Spin Hamiltonians of the P1 centre, the NV centre and a central spin
// coupled to a small group of 13C nuclei. All matrices are in Hz.
//
// Sign convention: the Zeeman interaction of every spin is -gamma B.S with the
// signed gyromagnetic ratio (gamma_e < 0), which is the physical sign relative
// to the point-dipole hyperfine tensor. Flipping the sign of all Zeeman terms
// at once is a time reversal: it leaves every spectrum unchanged and swaps the
// labels m -> -m.
namespace p1echo {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct P1Params {
  double gamma_e_mhz_per_g = constants::gamma_e_mhz_per_g;
  double gamma_n14_hz_per_g = constants::gamma_n14_hz_per_g;
  double a_par_mhz = constants::p1_a_par_mhz;
  double a_perp_mhz = constants::p1_a_perp_mhz;
  double q_mhz = constants::p1_quadrupole_mhz;
};

struct NVParams {
  double d_zfs_mhz = constants::nv_zero_field_mhz;
  double gamma_e_mhz_per_g = constants::gamma_e_mhz_per_g;
};

enum class JtLabel { on_axis, off_axis_1, off_axis_2, off_axis_3 };

inline std::string to_string(JtLabel l) {
  switch (l) {
    case JtLabel::on_axis: return "on-axis";
    case JtLabel::off_axis_1: return "off-axis-1";
    case JtLabel::off_axis_2: return "off-axis-2";
    case JtLabel::off_axis_3: return "off-axis-3";
  }
  return "on-axis";
}

/// Accepts "on-axis", "off-axis" (an alias for off-axis-1) and "off-axis-N".
inline JtLabel parse_jt_label(std::string_view s) {
  if (s == "on-axis" || s == "on") return JtLabel::on_axis;
  if (s == "off-axis" || s == "off" || s == "off-axis-1") return JtLabel::off_axis_1;
  if (s == "off-axis-2") return JtLabel::off_axis_2;
  if (s == "off-axis-3") return JtLabel::off_axis_3;
  throw Error("unknown Jahn-Teller orientation '" + std::string(s) + "'");
}

/// Static Jahn-Teller axis z' of a P1 centre.
struct JtOrientation {
  Vec3 axis = Vec3::UnitZ();
  JtLabel label = JtLabel::on_axis;

  static JtOrientation from_label(JtLabel l) {
    const auto bonds = lattice::bond_directions();
    return {bonds[static_cast<std::size_t>(l)], l};
  }
  static JtOrientation on_axis() { return from_label(JtLabel::on_axis); }
  static JtOrientation off_axis(int which = 1) {
    if (which < 1 || which > 3) throw Error("off-axis orientation index must be 1..3");
    return from_label(static_cast<JtLabel>(which));
  }
};

/// Proper rotation whose columns are the primed axes x', y', z' with z' = axis.
/// Rodrigues rotation about z x z'; any x', y' completion gives the same
/// spectrum because the transverse hyperfine coupling is isotropic.
inline Mat3 frame_for_axis(const Vec3& axis) {
  const Vec3 zp = axis.normalized();
  const Vec3 z = Vec3::UnitZ();
  const Vec3 v = z.cross(zp);
  const double s = v.norm();
  const double c = z.dot(zp);
  if (s < 1e-14) return c > 0 ? Mat3::Identity() : Vec3(1.0, -1.0, -1.0).asDiagonal().toDenseMatrix();
  const Vec3 k = v / s;
  Mat3 kx;
  kx << 0.0, -k.z(), k.y(), k.z(), 0.0, -k.x(), -k.y(), k.x(), 0.0;
  return Mat3::Identity() + s * kx + (1.0 - c) * kx * kx;
}

// ---------------------------------------------------------------------------
// Hyperfine (point dipole)
// ---------------------------------------------------------------------------

struct HyperfineTensor {
  Mat3 a = Mat3::Zero();  // Hz
  Vec3 separation_nm = Vec3::Zero();
};

/// A = (mu0 gamma1 gamma2 hbar / 4pi r^3)(1 - 3 r^ r^), returned in Hz.
inline HyperfineTensor hyperfine_tensor(const Vec3& r_nm, double gamma1_hz_per_g,
                                        double gamma2_hz_per_g) {
  const double r = r_nm.norm();
  if (!(r > 0.0)) throw Error("hyperfine tensor needs a non-zero separation");
  const Vec3 u = r_nm / r;
  const double c = constants::dipolar_prefactor_hz(gamma1_hz_per_g, gamma2_hz_per_g, r);
  return {c * (Mat3::Identity() - 3.0 * u * u.transpose()), r_nm};
}

// ---------------------------------------------------------------------------
// Central-spin Hamiltonians
// ---------------------------------------------------------------------------

/// P1 Hamiltonian: electron S=1/2 (x) 14N I=1, basis |m_S, m_I> with m_S = +1/2
/// first and m_I = +1, 0, -1. Result is 6x6 in Hz.
inline cmat build_p1_hamiltonian(const P1Params& p, const Vec3& b_gauss, const JtOrientation& jt) {
  const auto s = spin_operators(0.5);
  const auto n = spin_operators(1.0);
  const CompositeSpace space({2, 3});
  std::array<cmat, 3> se, in;
  for (int k = 0; k < 3; ++k) {
    se[k] = embed(s[k], 0, space);
    in[k] = embed(n[k], 1, space);
  }
  const Mat3 frame = frame_for_axis(jt.axis);
  const auto primed = [&frame](const std::array<cmat, 3>& v, int axis) {
    return cmat(frame(0, axis) * v[0] + frame(1, axis) * v[1] + frame(2, axis) * v[2]);
  };
  const double ge = p.gamma_e_mhz_per_g * 1e6;
  const double gn = p.gamma_n14_hz_per_g;

  cmat h = cmat::Zero(6, 6);
  for (int k = 0; k < 3; ++k) h -= b_gauss(k) * (ge * se[k] + gn * in[k]);
  const cmat sxp = primed(se, 0), syp = primed(se, 1), szp = primed(se, 2);
  const cmat ixp = primed(in, 0), iyp = primed(in, 1), izp = primed(in, 2);
  h += p.a_par_mhz * 1e6 * szp * izp;
  h += p.a_perp_mhz * 1e6 * (sxp * ixp + syp * iyp);
  h += p.q_mhz * 1e6 * izp * izp;
  return 0.5 * (h + h.adjoint());
}

/// D S_z^2 - gamma_e B.S on the spin-1 space, basis m_S = +1, 0, -1.
inline cmat build_nv_hamiltonian(const NVParams& p, const Vec3& b_gauss) {
  const auto s = spin_operators(1.0);
  const double ge = p.gamma_e_mhz_per_g * 1e6;
  cmat h = p.d_zfs_mhz * 1e6 * s.sz * s.sz;
  for (int k = 0; k < 3; ++k) h -= ge * b_gauss(k) * s[k];
  return h;
}

// ---------------------------------------------------------------------------
// Central spin + 13C group
// ---------------------------------------------------------------------------

struct BathSpin {
  Vec3 position_nm = Vec3::Zero();
  double gamma_hz_per_g = constants::gamma_c13_hz_per_g;
};

/// P1 centre. The rf drive addresses the pair |+1/2, m_I> <-> |-1/2, m_I>;
/// with thermal_n14 the signal is averaged over m_I = -1, 0, +1.
struct P1Central {
  P1Params params;
  JtOrientation jt = JtOrientation::off_axis(1);
  int m_i = -1;
  bool thermal_n14 = false;
};

/// NV centre along z, driven on the {m_S = 0, m_S = -1} subspace.
struct NVCentral {
  NVParams params;
};

/// A lone spin-1/2 electron with only a Zeeman term. Used as the analytic
/// test bed for echo envelope modulation.
struct BareElectronCentral {
  double gamma_e_mhz_per_g = constants::gamma_e_mhz_per_g;
};

using CentralSpec = std::variant<std::monostate, P1Central, NVCentral, BareElectronCentral>;

inline std::string central_kind(const CentralSpec& c) {
  if (std::holds_alternative<P1Central>(c)) return "p1";
  if (std::holds_alternative<NVCentral>(c)) return "nv";
  if (std::holds_alternative<BareElectronCentral>(c)) return "bare-electron";
  return "none";
}

/// Quantum numbers of one product-basis state of the central block.
struct BasisLabel {
  double m_s = 0.0;
  std::optional<int> m_i;
};

/// Central spin in isolation: its slots, Hamiltonian and electron operators.
struct CentralBlock {
  std::vector<int> dims;
  cmat hamiltonian;
  std::array<cmat, 3> s;
  std::vector<BasisLabel> basis;
  double gamma_e_hz_per_g = 0.0;

  int dim() const { return static_cast<int>(hamiltonian.rows()); }
};

inline CentralBlock central_block(const CentralSpec& spec, const Vec3& b_gauss) {
  CentralBlock out;
  if (const auto* p1 = std::get_if<P1Central>(&spec)) {
    out.dims = {2, 3};
    out.hamiltonian = build_p1_hamiltonian(p1->params, b_gauss, p1->jt);
    const auto s = spin_operators(0.5);
    const CompositeSpace space(out.dims);
    for (int k = 0; k < 3; ++k) out.s[k] = embed(s[k], 0, space);
    for (int i = 0; i < 6; ++i) out.basis.push_back({0.5 - i / 3, 1 - i % 3});
    out.gamma_e_hz_per_g = p1->params.gamma_e_mhz_per_g * 1e6;
  } else if (const auto* nv = std::get_if<NVCentral>(&spec)) {
    out.dims = {3};
    out.hamiltonian = build_nv_hamiltonian(nv->params, b_gauss);
    const auto s = spin_operators(1.0);
    for (int k = 0; k < 3; ++k) out.s[k] = s[k];
    for (int i = 0; i < 3; ++i) out.basis.push_back({1.0 - i, std::nullopt});
    out.gamma_e_hz_per_g = nv->params.gamma_e_mhz_per_g * 1e6;
  } else if (const auto* bare = std::get_if<BareElectronCentral>(&spec)) {
    out.dims = {2};
    const auto s = spin_operators(0.5);
    const double ge = bare->gamma_e_mhz_per_g * 1e6;
    out.hamiltonian = cmat::Zero(2, 2);
    for (int k = 0; k < 3; ++k) {
      out.s[k] = s[k];
      out.hamiltonian -= ge * b_gauss(k) * s[k];
    }
    out.basis = {{0.5, std::nullopt}, {-0.5, std::nullopt}};
    out.gamma_e_hz_per_g = ge;
  } else {
    throw Error("central spin specification is empty");
  }
  return out;
}

struct SystemOptions {
  /// 13C-13C point-dipole couplings inside a group.
  bool nuclear_dipolar = true;
  /// Keep only the S_z row of each electron-13C hyperfine tensor.
  bool secular_hyperfine = false;
  /// Multiplies every electron-13C hyperfine tensor (0 decouples the bath).
  double hyperfine_scale = 1.0;
};

struct SystemHamiltonian {
  CompositeSpace space;
  std::size_t central_slots = 0;
  cmat matrix;
};

/// H = H_central - sum_i gamma_C B.I_i + sum_i S.A_i.I_i (+ sum_{i<j} I_i.D_ij.I_j)
/// on the space [central slots..., 2 x group size].
inline SystemHamiltonian build_system_hamiltonian(const CentralSpec& central,
                                                  std::span<const BathSpin> group,
                                                  const Vec3& b_gauss,
                                                  const SystemOptions& opts = {},
                                                  std::optional<int> max_group_size = {}) {
  if (max_group_size && static_cast<int>(group.size()) > *max_group_size)
    throw Error("group has " + std::to_string(group.size()) + " spins, more than g = " +
                std::to_string(*max_group_size));
  for (std::size_t i = 0; i < group.size(); ++i)
    for (std::size_t j = i + 1; j < group.size(); ++j)
      if ((group[i].position_nm - group[j].position_nm).norm() < 1e-9)
        throw Error("bath spins " + std::to_string(i) + " and " + std::to_string(j) +
                    " share a position");

  const CentralBlock block = central_block(central, b_gauss);
  const int g = static_cast<int>(group.size());
  std::vector<int> carbon_dims(static_cast<std::size_t>(g), 2);
  const CompositeSpace carbons(carbon_dims);
  const int nc = carbons.total_dim();

  std::vector<int> dims = block.dims;
  dims.insert(dims.end(), carbon_dims.begin(), carbon_dims.end());
  SystemHamiltonian out{CompositeSpace(dims), block.dims.size(), cmat()};

  const auto half = spin_operators(0.5);
  std::vector<std::array<cmat, 3>> ic(static_cast<std::size_t>(g));
  for (int i = 0; i < g; ++i)
    for (int k = 0; k < 3; ++k) ic[i][k] = embed(half[k], static_cast<std::size_t>(i), carbons);

  const cmat id_central = cmat::Identity(block.dim(), block.dim());
  cmat bath_only = cmat::Zero(nc, nc);
  for (int i = 0; i < g; ++i)
    for (int k = 0; k < 3; ++k) bath_only -= group[i].gamma_hz_per_g * b_gauss(k) * ic[i][k];

  if (opts.nuclear_dipolar) {
    for (int i = 0; i < g; ++i)
      for (int j = i + 1; j < g; ++j) {
        const Mat3 d = hyperfine_tensor(group[j].position_nm - group[i].position_nm,
                                        group[i].gamma_hz_per_g, group[j].gamma_hz_per_g)
                           .a;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            if (d(a, b) != 0.0) bath_only += d(a, b) * ic[i][a] * ic[j][b];
      }
  }

  cmat h = detail::kron(block.hamiltonian, cmat::Identity(nc, nc)) + detail::kron(id_central, bath_only);
  for (int i = 0; i < g; ++i) {
    Mat3 a = opts.hyperfine_scale *
             hyperfine_tensor(group[i].position_nm, block.gamma_e_hz_per_g, group[i].gamma_hz_per_g).a;
    if (opts.secular_hyperfine) a.topRows<2>().setZero();
    for (int alpha = 0; alpha < 3; ++alpha) {
      cmat nuclear = cmat::Zero(nc, nc);
      for (int beta = 0; beta < 3; ++beta) nuclear += a(alpha, beta) * ic[i][beta];
      h += detail::kron(block.s[alpha], nuclear);
    }
  }
  out.matrix = 0.5 * (h + h.adjoint());
  return out;
}

}  // namespace p1echo
