#include "spinflow/local_operator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace spinflow {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string span_str(SiteSpan s) {
  return "[" + std::to_string(s.lo) + "," + std::to_string(s.hi) + "]";
}

}  // namespace

LocalOperator identity(SiteSpan support) {
  require(!support.empty(), "identity: empty support");
  const Eigen::Index d = Eigen::Index{1} << support.size();
  return {support, Matrix::Identity(d, d), true};
}

LocalOperator pauli(int site, Axis axis, SiteSpan support) {
  require(support.lo <= site && site <= support.hi,
          "pauli: site " + std::to_string(site) + " outside support " +
              span_str(support));
  Matrix m2(2, 2);
  bool herm = true;
  switch (axis) {
    case Axis::x: m2 << 0, 1, 1, 0; break;
    case Axis::y: m2 << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case Axis::z: m2 << 1, 0, 0, -1; break;
  }
  return embed({SiteSpan{site, site}, m2, herm}, support);
}

LocalOperator embed(const LocalOperator& a, SiteSpan target) {
  require(contains(target, a.support), "embed: target " + span_str(target) +
                                           " does not contain support " +
                                           span_str(a.support));
  if (target == a.support) return a;
  const Eigen::Index d_in = a.dim();
  const Eigen::Index d_below = Eigen::Index{1} << (a.support.lo - target.lo);
  const Eigen::Index d_above = Eigen::Index{1} << (target.hi - a.support.hi);
  const Eigen::Index d_out = d_below * d_in * d_above;
  Matrix out = Matrix::Zero(d_out, d_out);
  for (Eigen::Index hi = 0; hi < d_above; ++hi)
    for (Eigen::Index r = 0; r < d_in; ++r)
      for (Eigen::Index c = 0; c < d_in; ++c) {
        const Complex v = a.mat(r, c);
        if (v == Complex{}) continue;
        const Eigen::Index row0 = hi * d_in * d_below + r * d_below;
        const Eigen::Index col0 = hi * d_in * d_below + c * d_below;
        for (Eigen::Index lo = 0; lo < d_below; ++lo)
          out(row0 + lo, col0 + lo) = v;
      }
  return {target, std::move(out), a.hermitian};
}

LocalOperator add(const LocalOperator& a, const LocalOperator& b) {
  const SiteSpan h = hull(a.support, b.support);
  LocalOperator ea = embed(a, h);
  const LocalOperator eb = embed(b, h);
  ea.mat += eb.mat;
  ea.hermitian = a.hermitian && b.hermitian;
  return ea;
}

void accumulate(LocalOperator& dst, const LocalOperator& src, Complex weight) {
  require(contains(dst.support, src.support),
          "accumulate: destination " + span_str(dst.support) +
              " does not contain source " + span_str(src.support));
  const Eigen::Index d = src.dim();
  const Eigen::Index big = dst.dim();
  const Eigen::Index d_below = Eigen::Index{1} << (src.support.lo - dst.support.lo);
  const Eigen::Index d_above = Eigen::Index{1} << (dst.support.hi - src.support.hi);
  using StridedBlock =
      Eigen::Map<Matrix, Eigen::Unaligned, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
  for (Eigen::Index a = 0; a < d_above; ++a)
    for (Eigen::Index b = 0; b < d_below; ++b) {
      const Eigen::Index base = a * d * d_below + b;
      StridedBlock blk(dst.mat.data() + base + base * big, d, d,
                       Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(d_below * big, d_below));
      blk += weight * src.mat;
    }
  dst.hermitian = dst.hermitian && src.hermitian && weight.imag() == 0.0;
}

LocalOperator scale(Complex c, const LocalOperator& a) {
  return {a.support, c * a.mat, a.hermitian && c.imag() == 0.0};
}

LocalOperator mul(const LocalOperator& a, const LocalOperator& b) {
  const SiteSpan h = hull(a.support, b.support);
  LocalOperator ea = embed(a, h);
  const LocalOperator eb = embed(b, h);
  Matrix prod = ea.mat * eb.mat;
  return {h, std::move(prod), false};
}

LocalOperator commutator(const LocalOperator& a, const LocalOperator& b) {
  const SiteSpan h = hull(a.support, b.support);
  const LocalOperator ea = embed(a, h);
  const LocalOperator eb = embed(b, h);
  Matrix m = ea.mat * eb.mat - eb.mat * ea.mat;
  return {h, std::move(m), false};
}

LocalOperator adjoint(const LocalOperator& a) {
  return {a.support, a.mat.adjoint(), a.hermitian};
}

double op_norm(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  if (m.rows() != m.cols()) {
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues()(0);
  }
  const Eigen::Index d = m.rows();
  if (d <= 256) {
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues()(0);
  }
  // Deterministic power iteration on A^dagger A. The Rayleigh quotient
  // converges to the top singular value even with a degenerate top space.
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i)
    v(i) = Complex(1.0, 1e-3 * static_cast<double>((i * 2654435761u) % 97));
  v.normalize();
  double prev = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vector w = m * v;
    v = m.adjoint() * w;
    const double s2 = v.norm();
    if (s2 == 0.0) return 0.0;
    v /= s2;
    const double s = std::sqrt(s2);
    if (it > 4 && std::abs(s - prev) <= 1e-12 * std::max(1.0, s)) return s;
    prev = s;
  }
  return prev;
}

double op_norm(const LocalOperator& a) { return op_norm(a.mat); }

Matrix expm_skew(const Matrix& z, double tol) {
  const double defect =
      z.size() ? (z + z.adjoint()).cwiseAbs().maxCoeff() : 0.0;
  if (!(defect <= tol * std::max(1.0, z.size() ? z.cwiseAbs().maxCoeff() : 0.0)))
    throw std::invalid_argument("expm_skew: input is not anti-Hermitian (defect " +
                                std::to_string(defect) + ")");
  Matrix h = Complex(0, 1) * z;
  h = ((h + h.adjoint()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const auto& w = es.eigenvalues();
  const Matrix& vv = es.eigenvectors();
  Vector phase(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i)
    phase(i) = std::exp(Complex(0, -w(i)));
  return vv * phase.asDiagonal() * vv.adjoint();
}

LocalOperator expm_skew(const LocalOperator& z, double tol) {
  return {z.support, expm_skew(z.mat, tol), false};
}

LocalOperator conjugate(const LocalOperator& u, const LocalOperator& a) {
  const SiteSpan h = hull(u.support, a.support);
  const LocalOperator eu = embed(u, h);
  const LocalOperator ea = embed(a, h);
  Matrix m = eu.mat * ea.mat * eu.mat.adjoint();
  return {h, std::move(m), a.hermitian};
}

LocalOperator projector_from_states(const std::vector<StateVector>& states) {
  require(!states.empty(), "projector_from_states: no states");
  const SiteSpan sup = states.front().support;
  const Eigen::Index d = states.front().amplitudes.size();
  std::vector<Vector> basis;
  for (const auto& s : states) {
    require(s.support == sup, "projector_from_states: mixed supports");
    require(s.amplitudes.size() == d, "projector_from_states: mixed dimensions");
    Vector v = s.amplitudes;
    for (const auto& b : basis) v -= b.dot(v) * b;
    const double n = v.norm();
    if (n > 1e-12) basis.push_back(v / n);
  }
  Matrix p = Matrix::Zero(d, d);
  for (const auto& b : basis) p += b * b.adjoint();
  return {sup, std::move(p), true};
}

LocalOperator projector_from_indices(SiteSpan support,
                                     const std::vector<Eigen::Index>& indices) {
  const Eigen::Index d = Eigen::Index{1} << support.size();
  Matrix p = Matrix::Zero(d, d);
  for (const Eigen::Index g : indices) {
    require(0 <= g && g < d, "projector_from_indices: index out of range");
    p(g, g) = 1.0;
  }
  return {support, std::move(p), true};
}

double hermiticity_defect(const LocalOperator& a) {
  if (a.dim() == 0) return 0.0;
  return (a.mat - a.mat.adjoint()).cwiseAbs().maxCoeff();
}

void symmetrize(LocalOperator& a, double tol) {
  const double defect = hermiticity_defect(a);
  if (!(defect < tol))
    throw std::runtime_error("symmetrize: Hermiticity defect " +
                             std::to_string(defect) + " exceeds " +
                             std::to_string(tol));
  a.mat = ((a.mat + a.mat.adjoint()) / 2.0).eval();
  a.hermitian = true;
}

LocalOperator restrict_support(const LocalOperator& a, SiteSpan inner) {
  require(contains(a.support, inner),
          "restrict_support: " + span_str(inner) + " not inside " +
              span_str(a.support));
  if (inner == a.support) return a;
  const Eigen::Index d_in = Eigen::Index{1} << inner.size();
  const Eigen::Index d_below = Eigen::Index{1} << (inner.lo - a.support.lo);
  const Eigen::Index d_above = Eigen::Index{1} << (a.support.hi - inner.hi);
  Matrix out = Matrix::Zero(d_in, d_in);
  for (Eigen::Index hi = 0; hi < d_above; ++hi)
    for (Eigen::Index lo = 0; lo < d_below; ++lo) {
      const Eigen::Index base = hi * d_in * d_below + lo;
      for (Eigen::Index r = 0; r < d_in; ++r)
        for (Eigen::Index c = 0; c < d_in; ++c)
          out(r, c) += a.mat(base + r * d_below, base + c * d_below);
    }
  out /= static_cast<double>(d_below * d_above);
  return {inner, std::move(out), a.hermitian};
}

double support_leakage(const LocalOperator& a, SiteSpan inner) {
  const LocalOperator back = embed(restrict_support(a, inner), a.support);
  return (a.mat - back.mat).norm();
}

void dump(const LocalOperator& a, std::ostream& os) {
  const std::int64_t header[3] = {a.support.lo, a.support.hi,
                                  static_cast<std::int64_t>(a.dim())};
  os.write(reinterpret_cast<const char*>(header), sizeof(header));
  // Row-major complex128; this code targets little-endian hosts.
  for (Eigen::Index r = 0; r < a.dim(); ++r)
    for (Eigen::Index c = 0; c < a.dim(); ++c) {
      const double re = a.mat(r, c).real(), im = a.mat(r, c).imag();
      os.write(reinterpret_cast<const char*>(&re), sizeof(double));
      os.write(reinterpret_cast<const char*>(&im), sizeof(double));
    }
}

LocalOperator load_operator(std::istream& is) {
  std::int64_t header[3] = {};
  is.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!is) throw std::runtime_error("load_operator: truncated header");
  const SiteSpan sup{static_cast<int>(header[0]), static_cast<int>(header[1])};
  const Eigen::Index d = header[2];
  if (sup.empty() || d != (Eigen::Index{1} << sup.size()))
    throw std::runtime_error("load_operator: inconsistent header");
  Matrix m(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) {
      double re = 0, im = 0;
      is.read(reinterpret_cast<char*>(&re), sizeof(double));
      is.read(reinterpret_cast<char*>(&im), sizeof(double));
      m(r, c) = Complex(re, im);
    }
  if (!is) throw std::runtime_error("load_operator: truncated payload");
  return {sup, std::move(m), false};
}

void conjugate_in_place(Matrix& k, const Matrix& u, int bit_offset) {
  const Eigen::Index big = k.rows();
  const Eigen::Index d = u.rows();
  const Eigen::Index d_below = Eigen::Index{1} << bit_offset;
  require(k.cols() == big && u.cols() == d && d_below * d <= big &&
              big % (d_below * d) == 0,
          "conjugate_in_place: inconsistent dimensions");
  const Eigen::Index d_above = big / (d_below * d);
  using StridedBlock =
      Eigen::Map<Matrix, Eigen::Unaligned, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
  Matrix tmp;
  // Left factor: rows in groups strided by d_below.
  for (Eigen::Index a = 0; a < d_above; ++a)
    for (Eigen::Index b = 0; b < d_below; ++b) {
      const Eigen::Index base = a * d * d_below + b;
      StridedBlock rows(k.data() + base, d, big,
                        Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(big, d_below));
      tmp.noalias() = u * rows;
      rows = tmp;
    }
  // Right factor: columns in the same bit layout.
  for (Eigen::Index a = 0; a < d_above; ++a)
    for (Eigen::Index b = 0; b < d_below; ++b) {
      const Eigen::Index base = a * d * d_below + b;
      StridedBlock cols(k.data() + base * big, big, d,
                        Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(d_below * big, 1));
      tmp.noalias() = cols * u.adjoint();
      cols = tmp;
    }
}

void apply_embedded(const Matrix& u, int bit_offset, Vector& v) {
  const Eigen::Index big = v.size();
  const Eigen::Index d = u.rows();
  const Eigen::Index d_below = Eigen::Index{1} << bit_offset;
  require(u.cols() == d && d_below * d <= big && big % (d_below * d) == 0,
          "apply_embedded: inconsistent dimensions");
  const Eigen::Index d_above = big / (d_below * d);
  using StridedVec =
      Eigen::Map<Vector, Eigen::Unaligned, Eigen::InnerStride<Eigen::Dynamic>>;
  Vector tmp(d);
  for (Eigen::Index a = 0; a < d_above; ++a)
    for (Eigen::Index b = 0; b < d_below; ++b) {
      const Eigen::Index base = a * d * d_below + b;
      StridedVec seg(v.data() + base, d, Eigen::InnerStride<Eigen::Dynamic>(d_below));
      tmp.noalias() = u * seg;
      seg = tmp;
    }
}

}  // namespace spinflow
