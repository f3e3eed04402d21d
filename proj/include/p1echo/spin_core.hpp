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
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "p1echo/common.hpp"
#include "p1echo/constants.hpp"

// Spin operator algebra, tensor-product spaces, exact unitary evolution and
// ideal rotations. Hamiltonians are in ordinary frequency units (Hz) and times
// in seconds; evolve() supplies the factor 2pi.
namespace p1echo {

// ---------------------------------------------------------------------------
// Angular momentum matrices
// ---------------------------------------------------------------------------

struct SpinOperatorSet {
  double s = 0.5;
  cmat sx, sy, sz;

  int dim() const { return static_cast<int>(sz.rows()); }
  cmat identity() const { return cmat::Identity(dim(), dim()); }
  const cmat& operator[](int axis) const { return axis == 0 ? sx : (axis == 1 ? sy : sz); }
};

/// Standard spin-s matrices in the |m = s>, |s-1>, ..., |-s> basis.
inline SpinOperatorSet spin_operators(double s) {
  const double twice = 2.0 * s;
  if (!(s > 0.0) || std::abs(twice - std::round(twice)) > 1e-12)
    throw Error("spin quantum number must be a positive multiple of 1/2, got " +
                std::to_string(s));
  const int dim = static_cast<int>(std::lround(twice)) + 1;

  SpinOperatorSet ops;
  ops.s = s;
  ops.sz = cmat::Zero(dim, dim);
  cmat raise = cmat::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double m = s - i;
    ops.sz(i, i) = m;
    if (i > 0) raise(i - 1, i) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  const cmat lower = raise.adjoint();
  ops.sx = 0.5 * (raise + lower);
  ops.sy = cplx(0.0, -0.5) * (raise - lower);
  return ops;
}

// ---------------------------------------------------------------------------
// Composite Hilbert spaces
// ---------------------------------------------------------------------------

/// Ordered tensor product of subsystems. Simulations always use the slot order
/// [central electron, central nucleus (if any), bath spin 1 .. g].
class CompositeSpace {
 public:
  CompositeSpace() = default;
  explicit CompositeSpace(std::vector<int> dims) : dims_(std::move(dims)) {
    for (int d : dims_)
      if (d < 1) throw Error("slot dimension must be >= 1");
  }

  const std::vector<int>& dims() const { return dims_; }
  std::size_t slot_count() const { return dims_.size(); }
  int slot_dim(std::size_t slot) const { return dims_.at(slot); }

  int total_dim() const {
    int total = 1;
    for (int d : dims_) total *= d;
    return total;
  }

  /// Product of dimensions of slots [first, first + count).
  int block_dim(std::size_t first, std::size_t count) const {
    if (first + count > dims_.size()) throw Error("slot range out of bounds");
    int total = 1;
    for (std::size_t i = first; i < first + count; ++i) total *= dims_[i];
    return total;
  }

 private:
  std::vector<int> dims_;
};

namespace detail {

inline cmat kron(const cmat& a, const cmat& b) {
  cmat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace detail

/// Embeds an operator acting on the contiguous slots [first, first + count)
/// as op (x) identity on every other slot.
inline cmat embed_block(const cmat& op, std::size_t first, std::size_t count,
                        const CompositeSpace& space) {
  const int block = space.block_dim(first, count);
  if (op.rows() != block || op.cols() != block)
    throw Error("operator dimension " + std::to_string(op.rows()) +
                " does not match slot block dimension " + std::to_string(block));
  const int left = space.block_dim(0, first);
  const int right = space.block_dim(first + count, space.slot_count() - first - count);

  // I_left (x) op (x) I_right without forming the identities.
  const int n = left * block * right;
  cmat out = cmat::Zero(n, n);
  for (int l = 0; l < left; ++l)
    for (int i = 0; i < block; ++i)
      for (int j = 0; j < block; ++j) {
        const cplx v = op(i, j);
        if (v == cplx(0.0)) continue;
        const int row = (l * block + i) * right;
        const int col = (l * block + j) * right;
        for (int r = 0; r < right; ++r) out(row + r, col + r) = v;
      }
  return out;
}

inline cmat embed(const cmat& op, std::size_t slot, const CompositeSpace& space) {
  if (slot >= space.slot_count()) throw Error("slot index out of range");
  return embed_block(op, slot, 1, space);
}

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

class DensityMatrix {
 public:
  explicit DensityMatrix(cmat m, double tol = 1e-10) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw Error("density matrix must be square");
    if (!is_hermitian(m_, std::max(1e-12, tol * 1e-2)))
      throw Error("density matrix is not Hermitian");
    if (std::abs(m_.trace() - cplx(1.0)) > tol) throw Error("density matrix trace differs from 1");
    const Eigen::SelfAdjointEigenSolver<cmat> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) throw Error("density matrix has negative eigenvalues");
  }

  static DensityMatrix maximally_mixed(int dim) {
    return DensityMatrix(cmat::Identity(dim, dim) / static_cast<double>(dim));
  }

  static DensityMatrix pure(const cvec& psi) {
    const cvec n = psi / psi.norm();
    return DensityMatrix(n * n.adjoint());
  }

  const cmat& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  DensityMatrix transformed(const cmat& u) const { return DensityMatrix(u * m_ * u.adjoint()); }

  double expectation(const cmat& op) const { return (op * m_).trace().real(); }

 private:
  cmat m_;
};

// ---------------------------------------------------------------------------
// Unitary evolution
// ---------------------------------------------------------------------------

/// Cached eigendecomposition of a Hermitian Hamiltonian (Hz). at(t) returns
/// exp(-i 2pi H t) for t in seconds.
class Propagator {
 public:
  explicit Propagator(const cmat& h) {
    if (h.rows() != h.cols()) throw Error("Hamiltonian must be square");
    const double scale = std::max(1.0, max_abs(h));
    if (!is_hermitian(h, 1e-10 * scale)) throw Error("Hamiltonian is not Hermitian");
    const Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (h + h.adjoint()));
    if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
    energies_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
  }

  const Eigen::VectorXd& energies() const { return energies_; }
  const cmat& eigenvectors() const { return vectors_; }
  int dim() const { return static_cast<int>(energies_.size()); }

  /// exp(-i 2pi E t) as a vector in the eigenbasis.
  cvec phases(double t) const {
    if (t < 0.0) throw Error("evolution time must be non-negative");
    cvec p(energies_.size());
    for (Eigen::Index k = 0; k < energies_.size(); ++k)
      p(k) = std::polar(1.0, -2.0 * constants::pi * energies_(k) * t);
    return p;
  }

  cmat at(double t) const { return vectors_ * phases(t).asDiagonal() * vectors_.adjoint(); }

 private:
  Eigen::VectorXd energies_;
  cmat vectors_;
};

inline cmat evolve(const cmat& h, double t) { return Propagator(h).at(t); }

// ---------------------------------------------------------------------------
// Ideal rotations
// ---------------------------------------------------------------------------

enum class Axis { x, y, minus_x, minus_y };

inline Vec3 axis_vector(Axis a) {
  switch (a) {
    case Axis::x: return {1.0, 0.0, 0.0};
    case Axis::y: return {0.0, 1.0, 0.0};
    case Axis::minus_x: return {-1.0, 0.0, 0.0};
    case Axis::minus_y: return {0.0, -1.0, 0.0};
  }
  return {1.0, 0.0, 0.0};
}

/// Two levels of a slot (or of a slot block) forming an effective spin-1/2.
/// `first` plays the role of the spin-up state.
struct LevelPair {
  int first = 0;
  int second = 1;
};

/// exp(-i angle n.sigma / 2) for an in-plane unit axis n.
inline Eigen::Matrix2cd su2_rotation(const Vec3& axis, double angle) {
  if (std::abs(axis.z()) > 1e-12) throw Error("rotation axis must lie in the xy-plane");
  if (std::abs(axis.norm() - 1.0) > 1e-9) throw Error("rotation axis must be a unit vector");
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  const cplx minus_i(0.0, -1.0);
  Eigen::Matrix2cd r;
  r << c, minus_i * s * cplx(axis.x(), -axis.y()),
       minus_i * s * cplx(axis.x(), axis.y()), c;
  return r;
}

/// Rotation acting on span{first, second} (orthonormal vectors of one block),
/// identity on the orthogonal complement.
inline cmat subspace_rotation(const Vec3& axis, double angle, const cvec& first,
                              const cvec& second) {
  if (first.size() != second.size()) throw Error("subspace vectors differ in dimension");
  if (std::abs(first.dot(second)) > 1e-9 || std::abs(first.norm() - 1.0) > 1e-9 ||
      std::abs(second.norm() - 1.0) > 1e-9)
    throw Error("subspace vectors must be orthonormal and distinct");
  const Eigen::Matrix2cd r = su2_rotation(axis, angle);
  cmat basis(first.size(), 2);
  basis.col(0) = first;
  basis.col(1) = second;
  const cmat id = cmat::Identity(first.size(), first.size());
  return id - basis * basis.adjoint() + basis * r * basis.adjoint();
}

/// Ideal instantaneous rotation of one slot. A spin-1/2 slot may omit the
/// level pair; larger slots must name the two levels that are driven.
inline cmat rotation(const Vec3& axis, double angle, std::size_t slot,
                     std::optional<LevelPair> levels, const CompositeSpace& space) {
  const int dim = space.slot_dim(slot);
  if (!levels) {
    if (dim != 2) throw Error("a two-level subspace must be named for a slot of dimension " +
                              std::to_string(dim));
    levels = LevelPair{0, 1};
  }
  if (levels->first == levels->second) throw Error("subspace levels must be distinct");
  if (levels->first < 0 || levels->second < 0 || levels->first >= dim || levels->second >= dim)
    throw Error("subspace level out of range");
  const cvec a = cmat::Identity(dim, dim).col(levels->first);
  const cvec b = cmat::Identity(dim, dim).col(levels->second);
  return embed(subspace_rotation(axis, angle, a, b), slot, space);
}

inline cmat rotation(Axis axis, double angle, std::size_t slot, std::optional<LevelPair> levels,
                     const CompositeSpace& space) {
  return rotation(axis_vector(axis), angle, slot, levels, space);
}

}  // namespace p1echo
