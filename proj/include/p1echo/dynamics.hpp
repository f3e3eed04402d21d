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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "p1echo/bath.hpp"
#include "p1echo/common.hpp"
#include "p1echo/hamiltonians.hpp"
#include "p1echo/parallel.hpp"
#include "p1echo/pulse_parser.hpp"
#include "p1echo/pulse_program.hpp"
#include "p1echo/spin_core.hpp"

// Disjoint-cluster echo simulation. Each group (central spin + <= g carbons)
// starts in |a><a| (x) I / 2^g, where |a>, |b> are the two central eigenstates
// addressed by the drive. Pulses are ideal rotations on span{|a>, |b>} in the
// frame rotating with that transition; free evolution is exact under the full
// group Hamiltonian. The group signal is 2 Tr[P_a rho_f] - 1, signed so that
// the signal is +1 without a bath.
namespace p1echo {

/// Two central eigenstates driven by the pulses; `a` is the initial state.
struct DrivePair {
  cvec a, b;
  double e_a = 0.0, e_b = 0.0;  // Hz
  double weight = 1.0;          // statistical weight in a thermal average
  std::string label;
};

namespace detail {

/// Eigenvector of `es` that best represents `target`. Inside a degenerate
/// eigenspace the projection of `target` is used, made orthogonal to `orth`.
inline cvec eigenstate_near(const Eigen::SelfAdjointEigenSolver<cmat>& es, const cvec& target,
                            const cvec* orth = nullptr) {
  const cmat& v = es.eigenvectors();
  const Eigen::VectorXd& e = es.eigenvalues();
  const Eigen::VectorXd w = (v.adjoint() * target).cwiseAbs2();
  Eigen::Index best = 0;
  w.maxCoeff(&best);
  const double tol = 1e-9 * std::max(1.0, e.cwiseAbs().maxCoeff());
  cvec proj = cvec::Zero(target.size());
  for (Eigen::Index k = 0; k < e.size(); ++k)
    if (std::abs(e(k) - e(best)) <= tol) proj += v.col(k) * v.col(k).dot(target);
  if (orth) proj -= *orth * orth->dot(proj);
  if (proj.norm() < 1e-6) throw Error("cannot resolve the driven eigenstate");
  return proj.normalized();
}

}  // namespace detail

/// Driven transitions of a central spin. P1 in thermal mode yields one pair
/// per m_I with weight 1/3.
inline std::vector<DrivePair> drive_pairs(const CentralSpec& spec, const CentralBlock& block) {
  const Eigen::SelfAdjointEigenSolver<cmat> es(block.hamiltonian);
  const int dim = block.dim();
  const auto basis = [dim](int i) { return cvec(cmat::Identity(dim, dim).col(i)); };
  const auto make = [&](int ia, int ib, double weight, std::string label) {
    DrivePair p;
    p.a = detail::eigenstate_near(es, basis(ia));
    p.b = detail::eigenstate_near(es, basis(ib), &p.a);
    p.e_a = p.a.dot(block.hamiltonian * p.a).real();
    p.e_b = p.b.dot(block.hamiltonian * p.b).real();
    p.weight = weight;
    p.label = std::move(label);
    return p;
  };

  std::vector<DrivePair> out;
  if (const auto* p1 = std::get_if<P1Central>(&spec)) {
    const auto one = [&](int mi, double w) {
      if (mi < -1 || mi > 1) throw Error("m_I must be -1, 0 or +1");
      const int col = 1 - mi;
      out.push_back(make(col, 3 + col, w, "m_I=" + std::to_string(mi)));
    };
    if (p1->thermal_n14) {
      for (int mi : {-1, 0, 1}) one(mi, 1.0 / 3.0);
    } else {
      one(p1->m_i, 1.0);
    }
  } else if (std::holds_alternative<NVCentral>(spec)) {
    out.push_back(make(1, 2, 1.0, "m_S=0,-1"));
  } else if (std::holds_alternative<BareElectronCentral>(spec)) {
    out.push_back(make(0, 1, 1.0, "m_S=+1/2,-1/2"));
  } else {
    throw Error("central spin specification is empty");
  }
  return out;
}

inline void check_schedule_targets(const Schedule& s) {
  for (const auto& ev : s.events)
    if (const auto* r = std::get_if<RotationEvent>(&ev))
      if (!r->target.empty() && r->target != "probe")
        throw Error("pulse target '" + r->target +
                    "' is not part of the simulated system (only the probe spin is)");
}

/// One central spin + group, diagonalized once and reused for every schedule.
class GroupSimulator {
 public:
  GroupSimulator(const CentralSpec& central, std::span<const BathSpin> group, const Vec3& b_gauss,
                 const SystemOptions& opts = {}, std::optional<int> max_group_size = {})
      : block_(central_block(central, b_gauss)),
        sys_(build_system_hamiltonian(central, group, b_gauss, opts, max_group_size)) {
    pairs_ = drive_pairs(central, block_);
    m_ = sys_.space.total_dim() / block_.dim();
    const Eigen::SelfAdjointEigenSolver<cmat> es(sys_.matrix);
    if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
    energies_ = es.eigenvalues();
    const cmat vh = es.eigenvectors().adjoint();
    const cmat id = cmat::Identity(m_, m_);
    for (const auto& p : pairs_) {
      wa_.push_back(vh * detail::kron(p.a, id));
      wb_.push_back(vh * detail::kron(p.b, id));
    }
  }

  const std::vector<DrivePair>& pairs() const { return pairs_; }
  const SystemHamiltonian& system() const { return sys_; }
  int bath_dim() const { return m_; }

  /// 2 Tr[P_a rho_f] - 1 for drive pair `k`, without sign normalization.
  double raw_signal(const Schedule& s, std::size_t k = 0) const {
    check_schedule_targets(s);
    const DrivePair& p = pairs_.at(k);
    const cmat& wa = wa_[k];
    const cmat& wb = wb_[k];
    const double shift = 0.5 * (p.e_a + p.e_b);
    const double two_pi = 2.0 * constants::pi;

    cmat psi = wa;  // columns: |a> (x) |k> in the eigenbasis
    double t = 0.0;
    for (const auto& ev : s.events) {
      if (const auto* r = std::get_if<RotationEvent>(&ev)) {
        const Eigen::Matrix2cd r0 = su2_rotation(axis_vector(r->axis), r->angle);
        const cplx ua = std::polar(1.0, -two_pi * (p.e_a - shift) * t);
        const cplx ub = std::polar(1.0, -two_pi * (p.e_b - shift) * t);
        const cplx r00 = r0(0, 0), r11 = r0(1, 1);
        const cplx r01 = ua * r0(0, 1) * std::conj(ub);
        const cplx r10 = ub * r0(1, 0) * std::conj(ua);
        const cmat ca = wa.adjoint() * psi;
        const cmat cb = wb.adjoint() * psi;
        psi += wa * ((r00 - 1.0) * ca + r01 * cb) + wb * (r10 * ca + (r11 - 1.0) * cb);
      } else {
        const double dt = std::get<EvolutionEvent>(ev).duration;
        if (dt < 0.0) throw Error("evolution time must be non-negative");
        if (dt == 0.0) continue;
        for (Eigen::Index i = 0; i < energies_.size(); ++i)
          psi.row(i) *= std::polar(1.0, -two_pi * (energies_(i) - shift) * dt);
        t += dt;
      }
    }
    const double pop = (wa.adjoint() * psi).squaredNorm() / m_;
    return 2.0 * pop - 1.0;
  }

 private:
  CentralBlock block_;
  SystemHamiltonian sys_;
  std::vector<DrivePair> pairs_;
  Eigen::VectorXd energies_;
  std::vector<cmat> wa_, wb_;
  int m_ = 1;
};

/// Composed lab-frame unitary of a schedule on the full group space, with
/// each pulse written as U0(t) R U0(t)^dagger. Dense reference path used by
/// the tests; the simulator above never forms it.
inline cmat schedule_unitary(const GroupSimulator& sim, const Schedule& s, std::size_t k = 0) {
  check_schedule_targets(s);
  const DrivePair& p = sim.pairs().at(k);
  const SystemHamiltonian& sys = sim.system();
  const int d = sys.space.total_dim();
  const int m = sim.bath_dim();
  const cmat id_m = cmat::Identity(m, m);
  const cmat ba = detail::kron(p.a, id_m), bb = detail::kron(p.b, id_m);
  const double shift = 0.5 * (p.e_a + p.e_b);
  const Propagator prop(sys.matrix - shift * cmat::Identity(d, d));

  cmat u = cmat::Identity(d, d);
  double t = 0.0;
  for (const auto& ev : s.events) {
    if (const auto* r = std::get_if<RotationEvent>(&ev)) {
      const cplx ua = std::polar(1.0, -2.0 * constants::pi * (p.e_a - shift) * t);
      const cplx ub = std::polar(1.0, -2.0 * constants::pi * (p.e_b - shift) * t);
      cmat basis(d, 2 * m);
      basis << ua * ba, ub * bb;
      const cmat r2 = detail::kron(su2_rotation(axis_vector(r->axis), r->angle), id_m);
      const cmat rot = cmat::Identity(d, d) - basis * basis.adjoint() + basis * r2 * basis.adjoint();
      u = rot * u;
    } else {
      const double dt = std::get<EvolutionEvent>(ev).duration;
      u = prop.at(dt) * u;
      t += dt;
    }
  }
  return u;
}

/// +1 or -1 such that the bath-free signal of `s` is +1.
inline double normalization_sign(const CentralSpec& central, const Schedule& s, const Vec3& b_gauss,
                                 std::size_t k = 0) {
  const GroupSimulator bare(central, {}, b_gauss);
  const double raw = bare.raw_signal(s, k);
  if (std::abs(raw) < 0.5)
    throw Error("pulse sequence does not return the probe to a population state (bath-free signal " +
                std::to_string(raw) + ")");
  return raw > 0.0 ? 1.0 : -1.0;
}

/// S_G for a single group. In thermal-14N mode this is the m_I average of the
/// group signal, which equals S_T only when the bath is a single group.
inline double group_signal(const CentralSpec& central, std::span<const BathSpin> group,
                           const Schedule& s, const Vec3& b_gauss, const SystemOptions& opts = {},
                           std::optional<int> max_group_size = {}) {
  const GroupSimulator sim(central, group, b_gauss, opts, max_group_size);
  double out = 0.0;
  for (std::size_t k = 0; k < sim.pairs().size(); ++k)
    out += sim.pairs()[k].weight * normalization_sign(central, s, b_gauss, k) * sim.raw_signal(s, k);
  return out;
}

/// S_T(tau) = sum_m w_m prod_G S_G,m(tau) for each schedule of the grid. The
/// thermal 14N average is taken over the product because the nitrogen is
/// shared by every group.
inline std::vector<double> bath_signal(const CentralSpec& central, const Bath& bath,
                                       const Partition& partition,
                                       const std::vector<Schedule>& schedules, const Vec3& b_gauss,
                                       const SystemOptions& opts = {}) {
  validate_partition(partition, bath.size());
  const CentralBlock block = central_block(central, b_gauss);
  const std::size_t npairs = drive_pairs(central, block).size();

  std::vector<std::vector<double>> prod(npairs, std::vector<double>(schedules.size(), 1.0));
  for (std::size_t k = 0; k < npairs; ++k)
    for (std::size_t j = 0; j < schedules.size(); ++j)
      prod[k][j] = normalization_sign(central, schedules[j], b_gauss, k);

  std::vector<BathSpin> group;
  for (const auto& g : partition.groups) {
    group.clear();
    for (int i : g) group.push_back(bath.spins[static_cast<std::size_t>(i)]);
    const GroupSimulator sim(central, group, b_gauss, opts, partition.g);
    for (std::size_t k = 0; k < npairs; ++k)
      for (std::size_t j = 0; j < schedules.size(); ++j) prod[k][j] *= sim.raw_signal(schedules[j], k);
  }

  const auto pairs = drive_pairs(central, block);
  std::vector<double> out(schedules.size(), 0.0);
  for (std::size_t k = 0; k < npairs; ++k)
    for (std::size_t j = 0; j < schedules.size(); ++j) out[j] += pairs[k].weight * prod[k][j];
  return out;
}

inline double bath_signal(const CentralSpec& central, const Bath& bath, const Partition& partition,
                          const Schedule& schedule, const Vec3& b_gauss,
                          const SystemOptions& opts = {}) {
  return bath_signal(central, bath, partition, std::vector<Schedule>{schedule}, b_gauss, opts).front();
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

struct SimulationConfig {
  CentralSpec central = P1Central{};
  Vec3 b_gauss = Vec3(0.0, 0.0, 72.0);
  BathParams bath;
  int group_size = constants::default_group_size;
  CouplingMetric metric = CouplingMetric::secular_zz;
  int n_baths = constants::default_bath_count;
  std::vector<double> tau_grid;  // s
  PulseProgram sequence = expand_preset("hahn");
  std::uint64_t master_seed = 1;
  SystemOptions system;
  bool keep_per_bath = false;
  int threads = 1;  // wall time only
};

struct EchoCurve {
  std::vector<double> tau;     // s
  std::vector<double> signal;  // S_ave
  std::vector<std::vector<double>> per_bath;
  std::vector<std::uint64_t> bath_seeds;
  SimulationConfig config;
};

inline void validate(const SimulationConfig& c) {
  if (c.n_baths < 1) throw Error("number of baths must be >= 1");
  if (c.group_size < 1) throw Error("group size g must be >= 1");
  if (c.tau_grid.empty()) throw Error("tau grid is empty");
  for (std::size_t i = 0; i < c.tau_grid.size(); ++i) {
    if (!(c.tau_grid[i] >= 0.0)) throw Error("tau values must be >= 0");
    if (i && c.tau_grid[i] < c.tau_grid[i - 1]) throw Error("tau grid must be ascending");
  }
  if (std::holds_alternative<std::monostate>(c.central)) throw Error("central spin specification is empty");
}

/// Average of S_T over n_baths baths seeded by child_seed(master_seed, b).
/// Baths run in parallel and are reduced in index order.
inline EchoCurve ensemble_signal(const SimulationConfig& config) {
  validate(config);
  std::vector<Schedule> schedules;
  schedules.reserve(config.tau_grid.size());
  for (double tau : config.tau_grid) schedules.push_back(compile_schedule(config.sequence, tau));

  const auto n = static_cast<std::size_t>(config.n_baths);
  auto per_bath = parallel_map<std::vector<double>>(n, config.threads, [&](std::size_t b) {
    const Bath bath = generate_bath(child_seed(config.master_seed, b), config.bath);
    const Partition part = cluster_bath(bath, config.group_size, config.metric);
    return bath_signal(config.central, bath, part, schedules, config.b_gauss, config.system);
  });

  EchoCurve out;
  out.tau = config.tau_grid;
  out.config = config;
  out.signal.assign(schedules.size(), 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    out.bath_seeds.push_back(child_seed(config.master_seed, b));
    for (std::size_t j = 0; j < schedules.size(); ++j) out.signal[j] += per_bath[b][j];
  }
  for (double& v : out.signal) v /= static_cast<double>(n);
  if (config.keep_per_bath) out.per_bath = std::move(per_bath);
  return out;
}

/// One ensemble per field magnitude along z, all with the same master seed
/// (and therefore the same baths).
inline std::vector<EchoCurve> field_scan(const SimulationConfig& config, const std::vector<double>& b_list) {
  if (b_list.empty()) throw Error("field list is empty");
  std::vector<EchoCurve> out;
  for (double b : b_list) {
    if (!(b >= 0.0)) throw Error("field must be >= 0");
    SimulationConfig c = config;
    c.b_gauss = Vec3(0.0, 0.0, b);
    out.push_back(ensemble_signal(c));
  }
  return out;
}

}  // namespace p1echo
