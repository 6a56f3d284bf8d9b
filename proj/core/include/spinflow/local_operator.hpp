#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "spinflow/lattice.hpp"

namespace spinflow {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class Axis { x, y, z };

// Dense operator on a contiguous run of spin-1/2 sites.
//
// Basis convention (frozen; pinned by tests): a basis index b encodes the
// configuration as b = sum_i bit(i) * 2^(i - support.lo), i.e. site
// support.lo is the least significant bit, and bit value 0 means spin-up
// (sigma^z eigenvalue +1).
struct LocalOperator {
  SiteSpan support{1, 0};
  Matrix mat;
  bool hermitian = false;

  Eigen::Index dim() const { return mat.rows(); }
  int sites() const { return support.size(); }
};

// Normalized state on a contiguous run of sites, same basis convention.
struct StateVector {
  SiteSpan support{1, 0};
  Vector amplitudes;
};

LocalOperator identity(SiteSpan support);
LocalOperator pauli(int site, Axis axis, SiteSpan support);

// Tensor with identities so the operator lives on `target` (must contain the
// current support).
LocalOperator embed(const LocalOperator& a, SiteSpan target);

// Algebra; operands on different supports are first embedded into the hull.
LocalOperator add(const LocalOperator& a, const LocalOperator& b);
// dst += weight * (src embedded into dst.support); dst.support must contain
// src.support. In place, touching only the strided blocks src lives on.
void accumulate(LocalOperator& dst, const LocalOperator& src,
                Complex weight = Complex{1.0, 0.0});
LocalOperator scale(Complex c, const LocalOperator& a);
LocalOperator mul(const LocalOperator& a, const LocalOperator& b);
LocalOperator commutator(const LocalOperator& a, const LocalOperator& b);
LocalOperator adjoint(const LocalOperator& a);

// Largest singular value. Exact (full decomposition) on small matrices,
// deterministic power iteration on A^dagger A above that.
double op_norm(const Matrix& m);
double op_norm(const LocalOperator& a);

// Unitary exp(Z) of an anti-Hermitian Z via the Hermitian eigendecomposition
// of iZ. Throws when Z is not anti-Hermitian to within `tol` (max-entry).
Matrix expm_skew(const Matrix& z, double tol = 1e-12);
LocalOperator expm_skew(const LocalOperator& z, double tol = 1e-12);

// U A U^dagger on the hull of the two supports.
LocalOperator conjugate(const LocalOperator& u, const LocalOperator& a);

// Orthogonal projector onto the span of the given states (orthonormalized).
LocalOperator projector_from_states(const std::vector<StateVector>& states);
// Diagonal projector onto a set of basis indices.
LocalOperator projector_from_indices(SiteSpan support,
                                     const std::vector<Eigen::Index>& indices);

// Entrywise max |A - A^dagger|; the Hermiticity measure used by guards.
double hermiticity_defect(const LocalOperator& a);
// Replace A by (A + A^dagger)/2. Errors when the defect exceeds `tol`:
// silently repairing a large defect would mask an algorithmic bug.
void symmetrize(LocalOperator& a, double tol = 1e-10);

// Partial trace onto `inner` (divided by the traced dimension), and the
// Frobenius distance between the operator and its embedded restriction --
// zero exactly when the operator acts trivially outside `inner`.
LocalOperator restrict_support(const LocalOperator& a, SiteSpan inner);
double support_leakage(const LocalOperator& a, SiteSpan inner);

// Raw binary round-trip: support bounds and dimension as little-endian
// 64-bit integers, then the matrix row-major as complex128.
void dump(const LocalOperator& a, std::ostream& os);
LocalOperator load_operator(std::istream& is);

// In-place K <- (I (x) u (x) I) K (I (x) u (x) I)^dagger where u acts on the
// bits [bit_offset, bit_offset + log2(dim u)). Cost O(dim(K)^2 * dim(u)).
void conjugate_in_place(Matrix& k, const Matrix& u, int bit_offset);
// v <- (I (x) u (x) I) v with the same bit layout.
void apply_embedded(const Matrix& u, int bit_offset, Vector& v);

}  // namespace spinflow
