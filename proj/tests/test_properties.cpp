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

// Randomized invariants across modules.

#include <random>

#include <gtest/gtest.h>

#include "p1echo/p1echo.hpp"

using namespace p1echo;

namespace {

cmat random_hermitian(std::mt19937_64& gen, int d, double scale) {
  std::normal_distribution<double> n;
  cmat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cplx(n(gen), n(gen));
  return scale * 0.5 * (a + a.adjoint());
}

cmat random_density(std::mt19937_64& gen, int d) {
  std::normal_distribution<double> n;
  cmat a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cplx(n(gen), n(gen));
  cmat rho = a * a.adjoint();
  return rho / rho.trace().real();
}

std::vector<BathSpin> random_group(std::mt19937_64& gen, int n) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> r(0.3, 2.0);
  std::vector<BathSpin> out;
  for (int i = 0; i < n; ++i)
    out.push_back({r(gen) * Vec3(nd(gen), nd(gen), nd(gen)).normalized(), constants::gamma_c13_hz_per_g});
  return out;
}

CentralSpec random_central(std::mt19937_64& gen) {
  switch (gen() % 3) {
    case 0: {
      P1Central p;
      p.jt = JtOrientation::from_label(static_cast<JtLabel>(gen() % 4));
      p.m_i = static_cast<int>(gen() % 3) - 1;
      return p;
    }
    case 1: return NVCentral{};
    default: return BareElectronCentral{};
  }
}

}  // namespace

TEST(SpinCoreProperties, EvolutionIsUnitary) {
  std::mt19937_64 gen(100);
  std::uniform_real_distribution<double> t(0.0, 50e-6);
  for (int k = 0; k < 100; ++k) {
    const int d = 2 + static_cast<int>(gen() % 23);
    const cmat u = evolve(random_hermitian(gen, d, 1e6), t(gen));
    EXPECT_LT(max_abs(u.adjoint() * u - cmat::Identity(d, d)), 1e-10);
  }
}

TEST(SpinCoreProperties, ConjugationPreservesTraceAndHermiticity) {
  std::mt19937_64 gen(101);
  for (int k = 0; k < 100; ++k) {
    const int d = 2 + static_cast<int>(gen() % 23);
    const DensityMatrix rho(random_density(gen, d));
    const cmat u = evolve(random_hermitian(gen, d, 1e5), 1e-5);
    const DensityMatrix out = rho.transformed(u);
    EXPECT_NEAR(std::abs(out.matrix().trace() - cplx(1.0)), 0.0, 1e-10);
    EXPECT_TRUE(is_hermitian(out.matrix(), 1e-10));
  }
}

TEST(SpinCoreProperties, FreeEvolutionConservesEnergy) {
  std::mt19937_64 gen(102);
  std::uniform_real_distribution<double> t(0.0, 50e-6);
  for (int k = 0; k < 100; ++k) {
    const int d = 2 + static_cast<int>(gen() % 23);
    const cmat h = random_hermitian(gen, d, 1e6);
    const DensityMatrix rho(random_density(gen, d));
    const double e0 = rho.expectation(h);
    const double e1 = rho.transformed(evolve(h, t(gen))).expectation(h);
    EXPECT_LE(std::abs(e1 - e0), 1e-9 * std::max(1.0, max_abs(h)));
  }
}

TEST(SpinCoreProperties, RotationsAreUnitary) {
  std::mt19937_64 gen(103);
  std::uniform_real_distribution<double> ang(0.0, 2 * constants::pi);
  for (int k = 0; k < 100; ++k) {
    const CompositeSpace space({2, 3, 2});
    const double phi = ang(gen);
    const Vec3 n(std::cos(phi), std::sin(phi), 0.0);
    const cmat r = gen() % 2 ? rotation(n, ang(gen), 0, std::nullopt, space)
                             : rotation(n, ang(gen), 1, LevelPair{static_cast<int>(gen() % 2), 2}, space);
    EXPECT_TRUE(is_unitary(r, 1e-10));
  }
}

TEST(HamiltonianProperties, SystemHamiltoniansAreHermitian) {
  std::mt19937_64 gen(104);
  std::normal_distribution<double> n(0.0, 80.0);
  for (int k = 0; k < 60; ++k) {
    const auto c = random_central(gen);
    const auto group = random_group(gen, static_cast<int>(gen() % 4));
    const cmat h = build_system_hamiltonian(c, group, Vec3(n(gen), n(gen), n(gen))).matrix;
    EXPECT_TRUE(is_hermitian(h, 1e-10 * max_abs(h)));
  }
}

TEST(DynamicsProperties, SignalsBoundedAndUnityAtZero) {
  std::mt19937_64 gen(105);
  std::uniform_real_distribution<double> tau(0.0, 40e-6), bz(10.0, 200.0);
  const std::array<PulseProgram, 4> seqs{expand_preset("hahn"), expand_preset("cpmg", 2), expand_preset("xy8", 1),
                                         parse_sequence("pi/2(x) - tau - pi(y) - tau - pi/2(-x)")};
  for (int k = 0; k < 60; ++k) {
    const auto c = random_central(gen);
    const auto group = random_group(gen, 1 + static_cast<int>(gen() % 3));
    const Vec3 b(0, 0, bz(gen));
    const auto& seq = seqs[gen() % seqs.size()];
    EXPECT_NEAR(group_signal(c, group, compile_schedule(seq, 0.0), b), 1.0, 1e-9);
    const double s = group_signal(c, group, compile_schedule(seq, tau(gen)), b);
    EXPECT_LE(std::abs(s), 1.0 + 1e-9);
  }
}

TEST(DynamicsProperties, ComposedUnitaryIsUnitaryAndAgrees) {
  std::mt19937_64 gen(106);
  std::uniform_real_distribution<double> tau(0.0, 30e-6);
  for (int k = 0; k < 20; ++k) {
    const auto c = random_central(gen);
    const auto group = random_group(gen, 1 + static_cast<int>(gen() % 3));
    const GroupSimulator sim(c, group, Vec3(0, 0, 72));
    const auto s = compile_schedule(expand_preset(gen() % 2 ? "hahn" : "xy8", 1), tau(gen));
    const cmat u = schedule_unitary(sim, s);
    EXPECT_TRUE(is_unitary(u, 1e-10));
    const auto& p = sim.pairs()[0];
    const int m = sim.bath_dim();
    const cmat pa = detail::kron(p.a * p.a.adjoint(), cmat::Identity(m, m));
    const cmat rho = u * pa * u.adjoint() / static_cast<double>(m);
    EXPECT_NEAR(std::abs(rho.trace() - cplx(1.0)), 0.0, 1e-9);
    EXPECT_TRUE(is_hermitian(rho, 1e-9));
    EXPECT_NEAR(2.0 * (pa * rho).trace().real() - 1.0, sim.raw_signal(s), 1e-10);
  }
}

TEST(BathProperties, PartitionsAreValid) {
  std::mt19937_64 gen(107);
  for (int k = 0; k < 40; ++k) {
    BathParams p;
    p.n_spins = static_cast<int>(gen() % 130);
    p.placement = gen() % 4 ? Placement::lattice : Placement::continuum;
    const auto bath = generate_bath(gen(), p);
    ASSERT_EQ(static_cast<int>(bath.size()), p.n_spins);
    const int g = 1 + static_cast<int>(gen() % 5);
    const auto part = cluster_bath(bath, g, gen() % 2 ? CouplingMetric::secular_zz : CouplingMetric::tensor_norm);
    EXPECT_NO_THROW(validate_partition(part, bath.size()));
  }
}

TEST(ParserProperties, GarbageInputOnlyRaisesParseErrors) {
  std::mt19937_64 gen(108);
  const std::string alphabet = "pi/2()xy-taus[]^0123456789.deg*# ,\nzqXYTAU";
  for (int k = 0; k < 2000; ++k) {
    std::string text;
    const int len = 1 + static_cast<int>(gen() % 30);
    for (int i = 0; i < len; ++i) text += alphabet[gen() % alphabet.size()];
    try {
      const auto prog = parse_sequence(text);
      EXPECT_EQ(parse_sequence(print_program(prog)), prog) << text;
    } catch (const ParseError&) {
    }
  }
}
