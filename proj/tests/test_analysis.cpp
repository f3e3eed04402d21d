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

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "p1echo/bath.hpp"
#include "p1echo/echo_analysis.hpp"
#include "p1echo/spectroscopy.hpp"
#include "p1echo/statistics.hpp"

using namespace p1echo;

namespace {

std::vector<double> grid(double t_max, int n) {
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(t_max * i / (n - 1));
  return t;
}

const TransitionRow* nearest_row(const TransitionTable& t, double f_mhz) {
  const TransitionRow* best = nullptr;
  for (const auto& r : t.rows)
    if (!best || std::abs(r.freq_mhz - f_mhz) < std::abs(best->freq_mhz - f_mhz)) best = &r;
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

TEST(Statistics, GammaRatioAgainstSeriesOracle) {
  EXPECT_NEAR(oracle::gamma_ratio(4.0 / 3.0, 1.0), 0.8930, 1e-4);
  for (int k = 1; k <= 10; ++k) {
    const double n = 3.5e21;
    const double expect =
        std::pow(4.0 * oracle::kPi * n * 1e-21 / 3.0, -1.0 / 3.0) * oracle::gamma_ratio(k + 1.0 / 3.0, k);
    EXPECT_NEAR(mean_kth_distance(n, k) / expect, 1.0, 1e-12) << k;
  }
}

TEST(Statistics, MeanKthDistance) {
  const double n = ppm_to_density_cm3(0.2);
  EXPECT_NEAR(n, 3.52e16, 1e10);
  EXPECT_NEAR(mean_kth_distance(n, 1), 16.9, 0.2);
  EXPECT_NEAR(mean_kth_distance(8 * n, 3) / mean_kth_distance(n, 3), 0.5, 1e-12);
  for (int k = 1; k < 10; ++k) EXPECT_LT(mean_kth_distance(n, k), mean_kth_distance(n, k + 1));
  EXPECT_THROW(mean_kth_distance(0.0, 1), Error);
  EXPECT_THROW(mean_kth_distance(n, 0), Error);
}

TEST(Statistics, DipolarCoupling) {
  const double magic = std::acos(1.0 / std::sqrt(3.0));
  EXPECT_NEAR(mean_dipolar_coupling(16.9, magic), 0.0, 1e-12);
  EXPECT_NEAR(dipolar_coupling_khz(16.9, 0.5), 5.4, 0.3);
  const double c0 = mean_dipolar_coupling(16.9, 0.0), c90 = mean_dipolar_coupling(16.9, oracle::kPi / 2);
  EXPECT_NEAR(c0 / c90, -2.0, 1e-12);
  // SI oracle: mu0 gamma_e^2 hbar / (4 pi r^3) with gamma in rad/s/T.
  const double g = 2 * oracle::kPi * 2.8e10, r = 16.9e-9;
  const double ref_khz = oracle::kMu0 / (4 * oracle::kPi) * g * g * oracle::kHbar / (r * r * r) / (2 * oracle::kPi) * 1e-3;
  EXPECT_NEAR(c90 / ref_khz, 1.0, 1e-6);
  EXPECT_THROW(dipolar_coupling_khz(0.0, 1.0), Error);
}

TEST(Statistics, ConcentrationFromTd) {
  EXPECT_EQ(concentration_from_td(70e-6), 0.2);
  EXPECT_NEAR(concentration_from_td(140e-6), 0.1, 1e-15);
  EXPECT_NEAR(concentration_from_td(35e-6), 0.4, 1e-15);
  EXPECT_NEAR(td_kappa_ppm_us, 14.0, 1e-12);
  EXPECT_THROW(concentration_from_td(0.0), Error);
}

TEST(Statistics, LarmorFrequency) {
  EXPECT_NEAR(*larmor_frequency(72).period_s, 12.96e-6, 0.005e-6);
  EXPECT_NEAR(*larmor_frequency(144).period_s, 6.48e-6, 0.005e-6);
  EXPECT_EQ(larmor_frequency(0).freq_hz, 0.0);
  EXPECT_FALSE(larmor_frequency(0).period_s.has_value());
  EXPECT_THROW(larmor_frequency(-1), Error);
}

// ---------------------------------------------------------------------------
// Revivals and fits
// ---------------------------------------------------------------------------

TEST(Revivals, SyntheticCosineSquared) {
  for (double tl : {12.96e-6, 9.93e-6, 6.48e-6}) {
    const auto t = grid(40e-6, 401);
    std::vector<double> s;
    for (double x : t) s.push_back(std::pow(std::cos(oracle::kPi * x / tl), 2));
    const auto r = detect_revivals(t, s, tl);
    ASSERT_GE(r.revivals.size(), 2u);
    for (const auto& rv : r.revivals) {
      EXPECT_NEAR(rv.time / (rv.n * tl), 1.0, 1e-3) << tl;
      EXPECT_NEAR(rv.amplitude, 1.0, 1e-3);
    }
    for (std::size_t i = 1; i < r.revivals.size(); ++i) EXPECT_LT(r.revivals[i - 1].time, r.revivals[i].time);
  }
}

TEST(Revivals, ShiftedPeakFromCoarseSamples) {
  // A smooth peak between samples is located by the parabola, not the grid.
  const double tl = 10e-6, shift = 0.3e-6;
  const auto t = grid(25e-6, 51);
  std::vector<double> s;
  for (double x : t) s.push_back(std::exp(-std::pow((x - tl - shift) / 2e-6, 2)));
  const auto r = detect_revivals(t, s, tl);
  ASSERT_FALSE(r.revivals.empty());
  EXPECT_NEAR(r.revivals[0].time, tl + shift, 0.05e-6);
}

TEST(Revivals, MonotoneDecayHasNone) {
  const auto t = grid(40e-6, 200);
  std::vector<double> s;
  for (double x : t) s.push_back(std::exp(-x / 10e-6));
  const auto r = detect_revivals(t, s, 12.96e-6);
  EXPECT_TRUE(r.revivals.empty());
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_THROW(detect_revivals(t, s, 0.0), Error);
  EXPECT_THROW(detect_revivals(t, {1.0}, 1e-6), Error);
}

TEST(Fit, SyntheticExponentialAndGaussian) {
  const auto t = grid(60e-6, 61);
  std::vector<double> e, g;
  for (double x : t) {
    e.push_back(std::exp(-x / 30e-6));
    g.push_back(std::exp(-std::pow(x / 30e-6, 2)));
  }
  const auto fe = fit_t2(t, e, EnvelopeModel::exponential);
  EXPECT_NEAR(fe.t2 / 30e-6, 1.0, 0.01);
  EXPECT_LT(fe.residual_norm, 1e-6);
  const auto fg = fit_t2(t, g, EnvelopeModel::gaussian);
  EXPECT_NEAR(fg.t2 / 30e-6, 1.0, 0.01);
  EXPECT_EQ(fg.model, EnvelopeModel::gaussian);
}

TEST(Fit, RevivalEnvelope) {
  const double tl = 12.96e-6, t2 = 30e-6;
  const auto t = grid(60e-6, 601);
  std::vector<double> s;
  for (double x : t) s.push_back(std::exp(-x / t2) * std::pow(std::cos(oracle::kPi * x / tl), 2));
  const auto f = fit_t2(t, s, EnvelopeModel::exponential, tl);
  ASSERT_GE(f.revival_times.size(), 3u);
  // Revival maxima of e^(-t/T2) cos^2 sit slightly before n tau_L; the fit
  // still recovers T2 within a few percent.
  EXPECT_NEAR(f.t2 / t2, 1.0, 0.03);
  EXPECT_GT(f.t2, 0.0);
}

TEST(Fit, SingularInputsThrow) {
  const auto t = grid(40e-6, 41);
  EXPECT_THROW(fit_t2(t, std::vector<double>(41, 1.0), EnvelopeModel::exponential), Error);
  EXPECT_THROW(fit_t2({0.0, 1e-6, 2e-6}, {1.0, 0.5, 0.2}, EnvelopeModel::exponential), Error);
  std::vector<double> instant(41, 0.0);
  instant[0] = 1.0;
  EXPECT_THROW(fit_t2(t, instant, EnvelopeModel::exponential), Error);
}

// ---------------------------------------------------------------------------
// Transition table and moments
// ---------------------------------------------------------------------------

TEST(TransitionTable, FrequenciesMatchOracleSpectrum) {
  for (double b : {0.0, 32.0, 72.0, 150.0}) {
    for (int k = 0; k < 4; ++k) {
      const auto jt = JtOrientation::from_label(static_cast<JtLabel>(k));
      const auto table = transition_table(P1Params{}, Vec3(0, 0, b), {jt});
      ASSERT_EQ(table.rows.size(), 15u);
      const auto e = oracle::eigenvalues(oracle::p1_hamiltonian(Vec3(0, 0, b), jt.axis));
      std::vector<double> want, got;
      for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) want.push_back((e(j) - e(i)) * 1e-6);
      for (const auto& r : table.rows) {
        got.push_back(r.freq_mhz);
        EXPECT_GE(r.freq_mhz, 0.0);
        EXPECT_GE(r.moment, 0.0);
        EXPECT_EQ(r.jt, jt.label);
      }
      std::sort(want.begin(), want.end());
      std::sort(got.begin(), got.end());
      for (int i = 0; i < 15; ++i) EXPECT_NEAR(got[i], want[i], 1e-6);
    }
  }
}

TEST(TransitionTable, RotationInvariance) {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> n;
  for (int t = 0; t < 10; ++t) {
    const Mat3 r = Eigen::Quaterniond(n(gen), n(gen), n(gen), n(gen)).normalized().toRotationMatrix();
    const auto jt = JtOrientation::off_axis(1 + t % 3);
    const Vec3 b(5.0, 17.0, 72.0);
    const auto a = transition_table(P1Params{}, b, {jt});
    const auto c = transition_table(P1Params{}, r * b, {JtOrientation{r * jt.axis, jt.label}});
    for (int i = 0; i < 15; ++i) EXPECT_NEAR(a.rows[i].freq_mhz, c.rows[i].freq_mhz, 1e-6);
  }
}

TEST(TransitionTable, LabelsAndKinds) {
  const auto table = transition_table(P1Params{}, Vec3(0, 0, 3000), {JtOrientation::on_axis()});
  int electron = 0, nuclear = 0;
  for (const auto& r : table.rows) {
    ASSERT_FALSE(r.from_label.mixed);
    ASSERT_FALSE(r.to_label.mixed);
    EXPECT_TRUE(r.from_label.m_s == 0.5 || r.from_label.m_s == -0.5);
    EXPECT_LE(std::abs(r.from_label.m_i), 1);
    electron += r.kind == TransitionKind::electron;
    nuclear += r.kind == TransitionKind::nuclear;
  }
  EXPECT_EQ(electron, 3);
  EXPECT_EQ(nuclear, 6);
  StateLabel mixed;
  EXPECT_EQ(classify(mixed, table.rows[0].from_label), TransitionKind::hybridized);
  EXPECT_EQ(mixed.str(), "mixed");
  cvec v = cvec::Zero(6);
  v(5) = 1.0;
  EXPECT_EQ(label_p1_state(v).str(), "|-1/2,-1>");
  v(0) = 1.0;
  EXPECT_TRUE(label_p1_state(v.normalized()).mixed);
}

TEST(TransitionMoment, SecularElectronLimit) {
  const auto table = transition_table(P1Params{}, Vec3(0, 0, 20000), {JtOrientation::on_axis()});
  for (const auto& r : table.rows) {
    if (r.kind == TransitionKind::electron) {
      EXPECT_NEAR(r.moment, 1.0, 1e-2);
    }
  }
}

TEST(TransitionMoment, PureNuclearLimit) {
  // No transverse hyperfine and everything along z': product eigenstates.
  // |<m+1|I_x|m>| = 1/sqrt(2) for spin 1 against |<-|S_x|+>| = 1/2.
  P1Params p;
  p.a_perp_mhz = 0.0;
  const auto table = transition_table(p, Vec3(0, 0, 72), {JtOrientation::on_axis()});
  const double expect = std::sqrt(2.0) * oracle::kGammaN_HzPerG / std::abs(oracle::kGammaE_HzPerG);
  int seen = 0;
  for (const auto& r : table.rows)
    if (r.kind == TransitionKind::nuclear && std::abs(r.from_label.m_i - r.to_label.m_i) == 1) {
      EXPECT_NEAR(r.moment / expect, 1.0, 1e-6);
      ++seen;
    }
  EXPECT_EQ(seen, 4);
  EXPECT_NEAR(expect, 1.554e-4, 1e-6);
}

TEST(TransitionMoment, HybridizedLineIsIntermediate) {
  const auto jt = JtOrientation::off_axis(1);
  const auto table = transition_table(P1Params{}, Vec3(0, 0, 72), {jt});
  const auto* r = nearest_row(table, 68.0);
  ASSERT_NE(r, nullptr);
  EXPECT_NEAR(r->freq_mhz, 68.0, 2.0);
  EXPECT_NE(r->kind, TransitionKind::electron);
  const double nuclear = std::sqrt(2.0) * 307.7 / 2.8e6;
  EXPECT_GT(r->moment, 10 * nuclear);
  EXPECT_LT(r->moment, 1.0);
  const Eigen::SelfAdjointEigenSolver<cmat> es(build_p1_hamiltonian(P1Params{}, Vec3(0, 0, 72), jt));
  EXPECT_NEAR(transition_moment(es.eigenvectors().col(r->from), es.eigenvectors().col(r->to), P1Params{},
                                Vec3(0, 0, 72), jt),
              r->moment, 1e-12);
}

// ---------------------------------------------------------------------------
// Larmor distributions
// ---------------------------------------------------------------------------

TEST(LarmorDistribution, DistantSpinsSitAtBareLarmor) {
  Bath bath;
  std::mt19937_64 gen(50);
  std::normal_distribution<double> n;
  for (int i = 0; i < 10; ++i)
    bath.spins.push_back({50.0 * Vec3(n(gen), n(gen), n(gen)).normalized(), constants::gamma_c13_hz_per_g});
  bath.params.n_spins = 10;
  for (const CentralSpec& c : {CentralSpec(P1Central{}), CentralSpec(NVCentral{})}) {
    const auto h = larmor_distribution(c, bath, Vec3(0, 0, 72));
    ASSERT_EQ(h.branches.size(), 2u);
    for (const auto& br : h.branches) {
      ASSERT_EQ(br.freqs_hz.size(), 10u);
      for (double f : br.freqs_hz) EXPECT_NEAR(f, 1071.5 * 72, 1.0) << br.label;
      EXPECT_TRUE(br.flagged.empty());
    }
  }
}

TEST(LarmorDistribution, CountsAndEdges) {
  BathParams p;
  p.n_spins = 60;
  const auto bath = generate_bath(11, p);
  const auto h = larmor_distribution(NVCentral{}, bath, Vec3(0, 0, 72));
  EXPECT_EQ(h.branches[0].label, "m_S=0");
  EXPECT_EQ(h.branches[1].label, "m_S=-1");
  for (const auto& br : h.branches) {
    EXPECT_EQ(br.counts.size() + 1, h.bin_edges.size());
    int total = 0;
    for (int c : br.counts) total += c;
    EXPECT_EQ(total, 60);
  }
  for (std::size_t i = 1; i < h.bin_edges.size(); ++i) EXPECT_GT(h.bin_edges[i], h.bin_edges[i - 1]);
  EXPECT_LE(h.bin_edges.size(), 1001u);
  EXPECT_EQ(larmor_distribution(NVCentral{}, bath, Vec3(0, 0, 72), 7).bin_edges.size() <= 8u, true);
  EXPECT_THROW(larmor_distribution(NVCentral{}, Bath{}, Vec3(0, 0, 72)), Error);
}

TEST(Histogram, FreedmanDiaconis) {
  // 0..7: IQR 5.25 - 1.75 = 3.5, width 2 * 3.5 / cbrt(8) = 3.5, two bins.
  const std::vector<double> v{0, 1, 2, 3, 4, 5, 6, 7};
  const auto e = freedman_diaconis_edges(v);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_DOUBLE_EQ(e[0], 0.0);
  EXPECT_DOUBLE_EQ(e[1], 3.5);
  EXPECT_DOUBLE_EQ(e[2], 7.0);
  EXPECT_EQ(histogram_counts(v, e), (std::vector<int>{4, 4}));
  std::vector<double> wide;
  for (int i = 0; i < 5000; ++i) wide.push_back(std::pow(1.01, i));
  EXPECT_EQ(freedman_diaconis_edges(wide, 50).size(), 51u);
  EXPECT_EQ(freedman_diaconis_edges({3.0, 3.0, 3.0}).size(), 2u);
  EXPECT_THROW(freedman_diaconis_edges({}), Error);
}
