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
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "p1echo/common.hpp"
#include "p1echo/constants.hpp"
#include "p1echo/hamiltonians.hpp"
#include "p1echo/lattice.hpp"

// Random 13C baths around a central defect at the origin, and their disjoint
// partition into small, strongly coupled groups.
namespace p1echo {

enum class Placement { lattice, continuum };

inline std::string to_string(Placement p) { return p == Placement::lattice ? "lattice" : "continuum"; }

struct BathParams {
  int n_spins = constants::default_bath_spins;
  double abundance = constants::c13_natural_abundance;
  double min_radius_nm = constants::default_min_radius_nm;
  Placement placement = Placement::lattice;
};

struct Bath {
  std::vector<BathSpin> spins;
  std::uint64_t seed = 0;
  BathParams params;

  std::size_t size() const { return spins.size(); }
};

// ---------------------------------------------------------------------------
// Seeding
// ---------------------------------------------------------------------------

/// SplitMix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of bath `index` in an ensemble: splitmix64(splitmix64(master) ^ index).
/// Part of the file format; do not change.
inline std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ index);
}

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform
/// (std::uniform_real_distribution is not).
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline Bath generate_lattice_bath(std::uint64_t seed, const BathParams& p) {
  Bath bath{{}, seed, p};
  std::mt19937_64 gen(seed);
  const double q = constants::diamond_lattice_nm / 4.0;
  const double rmin = p.min_radius_nm * (1.0 - 1e-12);

  std::int64_t inner2 = 0;
  std::int64_t outer2 = 64;
  while (static_cast<int>(bath.spins.size()) < p.n_spins) {
    for (const auto& site : lattice::sites_in_shell(inner2, outer2)) {
      if (std::sqrt(static_cast<double>(site.norm2())) * q < rmin) continue;
      if (uniform01(gen) < p.abundance) {
        bath.spins.push_back({site.position_nm(), constants::gamma_c13_hz_per_g});
        if (static_cast<int>(bath.spins.size()) == p.n_spins) break;
      }
    }
    inner2 = outer2;
    outer2 = std::max(outer2 + 64, outer2 * 3 / 2);
  }
  return bath;
}

/// Homogeneous Poisson process of density abundance * atom density, outside
/// the exclusion sphere: arrival volumes are exponential increments, the
/// direction is isotropic.
inline Bath generate_continuum_bath(std::uint64_t seed, const BathParams& p) {
  Bath bath{{}, seed, p};
  std::mt19937_64 gen(seed);
  const double density_nm3 = p.abundance * constants::diamond_atom_density_cm3 * 1e-21;
  double volume = 4.0 / 3.0 * constants::pi * std::pow(p.min_radius_nm, 3);
  for (int i = 0; i < p.n_spins; ++i) {
    volume += -std::log1p(-uniform01(gen)) / density_nm3;
    const double r = std::cbrt(3.0 * volume / (4.0 * constants::pi));
    const double cos_t = 2.0 * uniform01(gen) - 1.0;
    const double phi = 2.0 * constants::pi * uniform01(gen);
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    bath.spins.push_back({r * Vec3(sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t),
                          constants::gamma_c13_hz_per_g});
  }
  return bath;
}

}  // namespace detail

/// Lattice mode visits diamond sites in order of distance (ties broken by the
/// integer site coordinates) and occupies each with probability `abundance`,
/// stopping at the n_spins-th hit. The draw sequence is therefore a pure
/// function of the seed.
inline Bath generate_bath(std::uint64_t seed, const BathParams& p = {}) {
  if (p.n_spins < 0) throw Error("bath size must be >= 0");
  if (!(p.abundance > 0.0 && p.abundance <= 1.0)) throw Error("abundance must lie in (0, 1]");
  if (!(p.min_radius_nm >= 0.0)) throw Error("minimum radius must be >= 0");
  return p.placement == Placement::lattice ? detail::generate_lattice_bath(seed, p)
                                           : detail::generate_continuum_bath(seed, p);
}

// ---------------------------------------------------------------------------
// Clustering
// ---------------------------------------------------------------------------

enum class CouplingMetric { secular_zz, tensor_norm };

/// |A_zz| of the 13C-13C point-dipole tensor, or its Frobenius norm.
inline double pair_coupling(const BathSpin& a, const BathSpin& b,
                            CouplingMetric metric = CouplingMetric::secular_zz) {
  const Vec3 r = b.position_nm - a.position_nm;
  if (r.norm() < 1e-12) throw Error("pair coupling of spins at the same position");
  const Mat3 t = hyperfine_tensor(r, a.gamma_hz_per_g, b.gamma_hz_per_g).a;
  return metric == CouplingMetric::secular_zz ? std::abs(t(2, 2)) : t.norm();
}

struct Partition {
  std::vector<std::vector<int>> groups;
  int g = constants::default_group_size;
};

/// Throws unless `p` is a disjoint cover of 0..n-1 by groups of size 1..g.
inline void validate_partition(const Partition& p, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& grp : p.groups) {
    if (grp.empty() || static_cast<int>(grp.size()) > p.g)
      throw Error("group size " + std::to_string(grp.size()) + " outside [1, " +
                  std::to_string(p.g) + "]");
    for (int i : grp) {
      if (i < 0 || static_cast<std::size_t>(i) >= n) throw Error("partition index out of range");
      if (seen[static_cast<std::size_t>(i)]++) throw Error("partition groups overlap");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw Error("partition does not cover the bath");
}

/// Greedy agglomeration: pairs in order of decreasing coupling (ties by lower
/// index pair) merge their groups when the result has at most g members.
/// Groups come out ordered by their smallest index, members ascending.
inline Partition cluster_bath(const Bath& bath, int g,
                              CouplingMetric metric = CouplingMetric::secular_zz) {
  if (g < 1) throw Error("group size g must be >= 1");
  const int n = static_cast<int>(bath.size());

  std::vector<int> parent(static_cast<std::size_t>(n)), count(static_cast<std::size_t>(n), 1);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&parent](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };

  if (g > 1) {
    std::vector<std::tuple<double, int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        pairs.emplace_back(pair_coupling(bath.spins[i], bath.spins[j], metric), i, j);
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      return std::make_pair(std::get<1>(a), std::get<2>(a)) <
             std::make_pair(std::get<1>(b), std::get<2>(b));
    });
    for (const auto& [c, i, j] : pairs) {
      const int ri = find(i), rj = find(j);
      if (ri == rj || count[ri] + count[rj] > g) continue;
      const int lo = std::min(ri, rj), hi = std::max(ri, rj);
      parent[hi] = lo;
      count[lo] += count[hi];
    }
  }

  Partition out{{}, g};
  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(out.groups.size());
      out.groups.emplace_back();
    }
    out.groups[slot[r]].push_back(i);
  }
  return out;
}

/// Fraction of multi-spin groups in which every member couples more strongly
/// to some partner in its own group than to any spin outside it.
inline double cluster_quality(const Bath& bath, const Partition& p,
                              CouplingMetric metric = CouplingMetric::secular_zz) {
  const int n = static_cast<int>(bath.size());
  std::vector<int> owner(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < p.groups.size(); ++k)
    for (int i : p.groups[k]) owner[i] = static_cast<int>(k);
  int total = 0, good = 0;
  for (std::size_t k = 0; k < p.groups.size(); ++k) {
    if (p.groups[k].size() < 2) continue;
    ++total;
    bool ok = true;
    for (int i : p.groups[k]) {
      double in = 0.0, out = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double& best = owner[j] == static_cast<int>(k) ? in : out;
        best = std::max(best, pair_coupling(bath.spins[i], bath.spins[j], metric));
      }
      ok = ok && in >= out;
    }
    good += ok;
  }
  return total == 0 ? 1.0 : static_cast<double>(good) / total;
}

}  // namespace p1echo
