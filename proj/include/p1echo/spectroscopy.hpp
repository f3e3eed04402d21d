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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "p1echo/bath.hpp"
#include "p1echo/common.hpp"
#include "p1echo/dynamics.hpp"
#include "p1echo/hamiltonians.hpp"

// P1 transition spectroscopy and state-conditional nuclear Larmor frequencies.
namespace p1echo {

// ---------------------------------------------------------------------------
// Transition table
// ---------------------------------------------------------------------------

/// (m_S, m_I) of an eigenstate, or mixed when no product state carries more
/// than half of its weight.
struct StateLabel {
  bool mixed = true;
  double m_s = 0.0;
  int m_i = 0;
  double weight = 0.0;  // largest |amplitude|^2

  std::string str() const {
    if (mixed) return "mixed";
    return std::string("|") + (m_s > 0 ? "+1/2" : "-1/2") + "," + (m_i > 0 ? "+" : "") + std::to_string(m_i) + ">";
  }
};

inline StateLabel label_p1_state(const cvec& v) {
  Eigen::Index k = 0;
  const double w = v.cwiseAbs2().maxCoeff(&k);
  StateLabel l;
  l.weight = w;
  if (w > 0.5) {
    l.mixed = false;
    l.m_s = k < 3 ? 0.5 : -0.5;
    l.m_i = 1 - static_cast<int>(k % 3);
  }
  return l;
}

enum class TransitionKind { electron, nuclear, double_quantum, hybridized };

inline std::string to_string(TransitionKind k) {
  switch (k) {
    case TransitionKind::electron: return "electron";
    case TransitionKind::nuclear: return "nuclear";
    case TransitionKind::double_quantum: return "double-quantum";
    case TransitionKind::hybridized: return "hybridized";
  }
  return "hybridized";
}

inline TransitionKind classify(const StateLabel& a, const StateLabel& b) {
  if (a.mixed || b.mixed) return TransitionKind::hybridized;
  const bool ds = a.m_s != b.m_s, di = a.m_i != b.m_i;
  if (ds && di) return TransitionKind::double_quantum;
  if (ds) return TransitionKind::electron;
  return TransitionKind::nuclear;  // both equal cannot occur for distinct eigenstates
}

/// |<f| gamma_e S_x + gamma_N I_x |i>| in Hz/G for a 6-dim P1 state pair.
inline double transition_moment_raw(const cvec& from, const cvec& to, const P1Params& p) {
  const CompositeSpace space({2, 3});
  const cmat op = p.gamma_e_mhz_per_g * 1e6 * embed(spin_operators(0.5).sx, 0, space) +
                  p.gamma_n14_hz_per_g * embed(spin_operators(1.0).sx, 1, space);
  return std::abs(to.dot(op * from));
}

struct TransitionRow {
  double freq_mhz = 0.0;
  int from = 0, to = 0;  // eigenstate indices, ascending energy
  StateLabel from_label, to_label;
  TransitionKind kind = TransitionKind::hybridized;
  double moment = 0.0;   // relative to the strongest electron line
  JtLabel jt = JtLabel::on_axis;
};

struct TransitionTable {
  Vec3 b_gauss = Vec3::Zero();
  P1Params params;
  std::vector<TransitionRow> rows;
};

/// All 15 eigenvalue gaps of the P1 Hamiltonian per JT orientation, labelled
/// by dominant product components. Moments are normalized to the strongest
/// electron transition found at this field across the requested orientations.
inline TransitionTable transition_table(const P1Params& p, const Vec3& b_gauss, const std::vector<JtOrientation>& jts) {
  TransitionTable t{b_gauss, p, {}};
  double strongest = 0.0;
  for (const auto& jt : jts) {
    const Eigen::SelfAdjointEigenSolver<cmat> es(build_p1_hamiltonian(p, b_gauss, jt));
    const auto& e = es.eigenvalues();
    const auto& v = es.eigenvectors();
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j) {
        TransitionRow r;
        r.from = i;
        r.to = j;
        r.freq_mhz = (e(j) - e(i)) * 1e-6;
        r.from_label = label_p1_state(v.col(i));
        r.to_label = label_p1_state(v.col(j));
        r.kind = classify(r.from_label, r.to_label);
        r.moment = transition_moment_raw(v.col(i), v.col(j), p);
        r.jt = jt.label;
        if (r.kind == TransitionKind::electron) strongest = std::max(strongest, r.moment);
        t.rows.push_back(r);
      }
  }
  if (strongest > 0.0)
    for (auto& r : t.rows) r.moment /= strongest;
  return t;
}

/// Largest raw moment among electron-type transitions of one orientation.
inline double strongest_electron_moment(const P1Params& p, const Vec3& b_gauss, const JtOrientation& jt) {
  const Eigen::SelfAdjointEigenSolver<cmat> es(build_p1_hamiltonian(p, b_gauss, jt));
  const cmat& v = es.eigenvectors();
  double best = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      if (classify(label_p1_state(v.col(i)), label_p1_state(v.col(j))) == TransitionKind::electron)
        best = std::max(best, transition_moment_raw(v.col(i), v.col(j), p));
  if (!(best > 0.0)) throw Error("no electron transition to normalize against");
  return best;
}

/// Moment of one transition relative to the strongest electron line of the
/// same Hamiltonian.
inline double transition_moment(const cvec& from, const cvec& to, const P1Params& p, const Vec3& b_gauss,
                                const JtOrientation& jt) {
  return transition_moment_raw(from, to, p) / strongest_electron_moment(p, b_gauss, jt);
}

// ---------------------------------------------------------------------------
// Conditional Larmor frequencies
// ---------------------------------------------------------------------------

struct LarmorBranch {
  std::string label;
  std::vector<double> freqs_hz;  // one per bath spin
  std::vector<int> counts;
  std::vector<int> flagged;      // bath indices whose manifold assignment is ambiguous

  double mean() const {
    double s = 0.0;
    for (double f : freqs_hz) s += f;
    return freqs_hz.empty() ? 0.0 : s / freqs_hz.size();
  }
  double variance() const {
    if (freqs_hz.size() < 2) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (double f : freqs_hz) s += (f - m) * (f - m);
    return s / (freqs_hz.size() - 1);
  }
};

struct LarmorHistogram {
  std::vector<double> bin_edges;  // Hz
  std::vector<LarmorBranch> branches;
  std::uint64_t bath_seed = 0;
  double bare_larmor_hz = 0.0;
};

/// Freedman-Diaconis edges covering `values`, at most `max_bins` bins.
inline std::vector<double> freedman_diaconis_edges(std::vector<double> values, int max_bins = 1000) {
  if (values.empty()) throw Error("cannot bin an empty sample");
  std::sort(values.begin(), values.end());
  const double lo = values.front(), hi = values.back();
  const auto quantile = [&values](double q) {
    const double pos = q * (values.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double f = pos - i;
    return i + 1 < values.size() ? values[i] * (1 - f) + values[i + 1] * f : values[i];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  int bins = 1;
  if (hi > lo) {
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(values.size()));
    bins = width > 0.0 ? static_cast<int>(std::ceil((hi - lo) / width)) : max_bins;
    bins = std::clamp(bins, 1, max_bins);
  }
  const double span = hi > lo ? hi - lo : std::max(1.0, std::abs(lo) * 1e-9);
  const double start = hi > lo ? lo : lo - 0.5 * span;
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) edges[i] = start + span * i / bins;
  return edges;
}

inline std::vector<int> histogram_counts(const std::vector<double>& values, const std::vector<double>& edges) {
  std::vector<int> c(edges.size() - 1, 0);
  for (double v : values) {
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    std::size_t k = static_cast<std::size_t>(std::distance(edges.begin(), it));
    k = k == 0 ? 0 : k - 1;
    c[std::min(k, c.size() - 1)]++;
  }
  return c;
}

/// For every bath spin: diagonalize central + that spin, and in each driven
/// central state (|a>, |b> of the drive pair) take the splitting of the two
/// eigenstates with most weight in that state. A weight below 0.75 flags the
/// spin as ambiguously assigned.
inline LarmorHistogram larmor_distribution(const CentralSpec& central, const Bath& bath, const Vec3& b_gauss,
                                           int max_bins = 1000) {
  if (bath.size() == 0) throw Error("bath is empty");
  const CentralBlock block = central_block(central, b_gauss);
  const auto pairs = drive_pairs(central, block);
  const DrivePair& p = pairs.front();

  LarmorHistogram h;
  h.bath_seed = bath.seed;
  h.bare_larmor_hz = constants::gamma_c13_hz_per_g * b_gauss.norm();
  std::string la, lb;
  if (std::holds_alternative<NVCentral>(central)) {
    la = "m_S=0";
    lb = "m_S=-1";
  } else {
    la = "m_S=+1/2";
    lb = "m_S=-1/2";
  }
  h.branches = {{la, {}, {}, {}}, {lb, {}, {}, {}}};

  SystemOptions opts;
  opts.nuclear_dipolar = false;
  const cmat id2 = cmat::Identity(2, 2);
  const cmat proj_a = detail::kron(p.a, id2), proj_b = detail::kron(p.b, id2);
  for (std::size_t i = 0; i < bath.size(); ++i) {
    const std::vector<BathSpin> one{bath.spins[i]};
    const auto sys = build_system_hamiltonian(central, one, b_gauss, opts);
    const Eigen::SelfAdjointEigenSolver<cmat> es(sys.matrix);
    for (int side = 0; side < 2; ++side) {
      const Eigen::VectorXd w = ((side == 0 ? proj_a : proj_b).adjoint() * es.eigenvectors()).colwise().squaredNorm();
      Eigen::Index k1 = 0;
      w.maxCoeff(&k1);
      Eigen::Index k2 = k1 == 0 ? 1 : 0;
      for (Eigen::Index k = 0; k < w.size(); ++k)
        if (k != k1 && w(k) > w(k2)) k2 = k;
      auto& br = h.branches[side];
      br.freqs_hz.push_back(std::abs(es.eigenvalues()(k1) - es.eigenvalues()(k2)));
      if (w(k1) < 0.75 || w(k2) < 0.75) br.flagged.push_back(static_cast<int>(i));
    }
  }
  std::vector<double> all = h.branches[0].freqs_hz;
  all.insert(all.end(), h.branches[1].freqs_hz.begin(), h.branches[1].freqs_hz.end());
  h.bin_edges = freedman_diaconis_edges(all, max_bins);
  for (auto& br : h.branches) br.counts = histogram_counts(br.freqs_hz, h.bin_edges);
  return h;
}

}  // namespace p1echo
