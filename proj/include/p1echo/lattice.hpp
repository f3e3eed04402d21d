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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <vector>

#include "p1echo/common.hpp"
#include "p1echo/constants.hpp"

// Diamond-cubic geometry. The lab frame puts the crystal [111] direction on z
// (the field and NV axis) and [1-10] on x.
namespace p1echo::lattice {

/// Rows are the lab axes expressed in crystal coordinates.
inline Mat3 crystal_to_lab() {
  Mat3 r;
  r.row(0) = Vec3(1.0, -1.0, 0.0).normalized();
  r.row(1) = Vec3(1.0, 1.0, -2.0).normalized();
  r.row(2) = Vec3(1.0, 1.0, 1.0).normalized();
  return r;
}

/// The four N-C bond directions of a substitutional site, in the lab frame.
/// Index 0 is [111] (exactly z); 1..3 are the off-axis bonds at 109.47 deg.
inline std::array<Vec3, 4> bond_directions() {
  const Mat3 r = crystal_to_lab();
  std::array<Vec3, 4> out{
      r * Vec3(1.0, 1.0, 1.0).normalized(), r * Vec3(1.0, -1.0, -1.0).normalized(),
      r * Vec3(-1.0, 1.0, -1.0).normalized(), r * Vec3(-1.0, -1.0, 1.0).normalized()};
  out[0] = Vec3::UnitZ();
  return out;
}

inline double bond_length_nm() { return std::sqrt(3.0) / 4.0 * constants::diamond_lattice_nm; }

/// A lattice site in units of a/4. Diamond sites are integer triples that are
/// either all even with sum = 0 (mod 4) or all odd with sum = 3 (mod 4).
struct Site {
  int x = 0, y = 0, z = 0;

  std::int64_t norm2() const {
    return std::int64_t{x} * x + std::int64_t{y} * y + std::int64_t{z} * z;
  }
  Vec3 position_nm() const {
    const double q = constants::diamond_lattice_nm / 4.0;
    return crystal_to_lab() * Vec3(x * q, y * q, z * q);
  }
  friend bool operator<(const Site& a, const Site& b) {
    return std::make_tuple(a.norm2(), a.x, a.y, a.z) < std::make_tuple(b.norm2(), b.x, b.y, b.z);
  }
  friend bool operator==(const Site& a, const Site& b) = default;
};

inline bool is_diamond_site(int x, int y, int z) {
  const auto mod4 = [](int v) { return ((v % 4) + 4) % 4; };
  const bool even = (x % 2 == 0) && (y % 2 == 0) && (z % 2 == 0);
  const bool odd = (x % 2 != 0) && (y % 2 != 0) && (z % 2 != 0);
  if (even) return mod4(x + y + z) == 0;
  if (odd) return mod4(x + y + z) == 3;
  return false;
}

/// Sites with (inner, outer] squared radius in units of (a/4)^2, sorted by
/// distance then lexicographically, so draws along this order are stable.
inline std::vector<Site> sites_in_shell(std::int64_t inner2, std::int64_t outer2) {
  std::vector<Site> out;
  const int n = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(outer2)))) + 1;
  for (int x = -n; x <= n; ++x)
    for (int y = -n; y <= n; ++y)
      for (int z = -n; z <= n; ++z) {
        if (!is_diamond_site(x, y, z)) continue;
        const Site s{x, y, z};
        const auto d2 = s.norm2();
        if (d2 > inner2 && d2 <= outer2) out.push_back(s);
      }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace p1echo::lattice
