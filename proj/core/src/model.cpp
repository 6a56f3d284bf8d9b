#include <spinflow/model.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <spinflow/ed.hpp>

namespace spinflow {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// z eigenvalue (+1 for up) of site offset `i` in basis state `b`.
inline double zval(Eigen::Index b, int i) {
  return 1.0 - 2.0 * static_cast<double>((b >> i) & 1);
}

}  // namespace

std::vector<std::string> validate(const ModelParams& p, bool for_flow) {
  std::vector<std::string> warnings;
  require(p.n_sites >= 2, "n_sites must be at least 2");
  require(p.j_coupling != 0.0, "j_coupling must be nonzero");
  require(p.h_field >= 0.0, "h_field must be nonnegative");
  require(p.t_coupling >= 0.0, "t_coupling must be nonnegative");

  const double j = p.j_coupling, h = p.h_field;
  if (p.regime() == Regime::antiferromagnetic) {
    require(h < std::abs(j),
            "antiferromagnetic regime requires h < |J|, got h=" +
                std::to_string(h) + ", |J|=" + std::to_string(std::abs(j)));
    if (h >= 0.5 * std::abs(j))
      warnings.push_back(
          "h >= |J|/2: outside the regime with guaranteed uniform bounds");
    if (p.t_coupling >= 0.1 * (std::abs(j) - h))
      warnings.push_back("t_coupling is not small compared to |J|-h");
  } else {
    if (p.t_coupling >= 0.1 * (j + h))
      warnings.push_back("t_coupling is not small compared to J+h");
  }

  if (for_flow && p.regime() == Regime::ferromagnetic) {
    require(h > 0.0, "the flow requires h > 0 in the ferromagnetic regime "
                     "(h = 0 is accepted for ED-only checks)");
    require(static_cast<double>(p.xi) > j / h,
            "ferromagnetic flow requires xi > J/h, got xi=" +
                std::to_string(p.xi) + ", J/h=" + std::to_string(j / h));
  }
  return warnings;
}

Eigen::VectorXd h0_diagonal(SiteSpan range, const ModelParams& p) {
  if (range.size() < 2)
    throw std::invalid_argument("h0: range must have at least 2 sites");
  const int n = static_cast<int>(range.size());
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::VectorXd d(dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    double zz = 0.0, z = zval(b, 0);
    double zsum = z;
    for (int i = 1; i < n; ++i) {
      const double zn = zval(b, i);
      zz += z * zn;
      zsum += zn;
      z = zn;
    }
    d[b] = -p.j_coupling * zz - p.h_field * zsum;
  }
  return d;
}

Eigen::VectorXd hc_diagonal(SiteSpan range, const ModelParams& p) {
  if (range.size() < 2)
    throw std::invalid_argument("hc: range must have at least 2 sites");
  const int n = static_cast<int>(range.size());
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::VectorXd d(dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    double acc = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
      const double zi = zval(b, i), zn = zval(b, i + 1);
      acc -= p.j_coupling * zi * zn + 0.5 * p.h_field * (zi + zn);
    }
    d[b] = acc;
  }
  return d;
}

namespace {

LocalOperator diagonal_operator(SiteSpan range, const Eigen::VectorXd& d) {
  LocalOperator op;
  op.support = range;
  op.mat = Matrix::Zero(d.size(), d.size());
  op.mat.diagonal() = d.cast<Complex>();
  op.hermitian = true;
  return op;
}

}  // namespace

LocalOperator h0(SiteSpan range, const ModelParams& p) {
  return diagonal_operator(range, h0_diagonal(range, p));
}

LocalOperator hc(SiteSpan range, const ModelParams& p) {
  return diagonal_operator(range, hc_diagonal(range, p));
}

LocalOperator v_perp(SiteSpan range, const ModelParams& p) {
  if (range.size() < 2)
    throw std::invalid_argument("v_perp: range must have at least 2 sites");
  const int n = static_cast<int>(range.size());
  const Eigen::Index dim = Eigen::Index{1} << n;
  LocalOperator op;
  op.support = range;
  op.mat = Matrix::Zero(dim, dim);
  op.hermitian = true;
  // (sx.sx + sy.sy)/2 on a bond is the flip-flop |ud><du| + |du><ud|; the
  // perturbation carries 1/(2 xi) per definition, i.e. 1/xi per flip-flop.
  const double w = 1.0 / static_cast<double>(p.xi);
  for (int i = 0; i + 1 < n; ++i) {
    const Eigen::Index mask = Eigen::Index{3} << i;
    for (Eigen::Index b = 0; b < dim; ++b) {
      const int bi = static_cast<int>((b >> i) & 1);
      const int bn = static_cast<int>((b >> (i + 1)) & 1);
      if (bi != bn) op.mat(b ^ mask, b) += w;
    }
  }
  return op;
}

LocalOperator v_perp(Interval cell, const Lattice& lat, const ModelParams& p) {
  if (cell.len != 1)
    throw std::invalid_argument("v_perp: interval must have unit length");
  return v_perp(lat.micro(cell), p);
}

LocalOperator k_lambda(const ModelParams& p, Eigen::Index dense_cap) {
  validate(p);
  const Lattice lat(p.n_sites, p.xi);
  const SiteSpan full{1, p.n_sites};
  if ((Eigen::Index{1} << p.n_sites) > dense_cap)
    throw std::runtime_error("k_lambda: dimension 2^" +
                             std::to_string(p.n_sites) +
                             " exceeds the dense cap");
  LocalOperator k = h0(full, p);
  const double eps = p.eps();
  if (eps != 0.0) {
    for (int q = 1; q <= lat.q_max(); ++q) {
      LocalOperator v = v_perp(Interval{q, 1}, lat, p);
      accumulate(k, v, eps);
    }
  }
  return k;
}

std::vector<StateVector> GroundStateData::vectors() const {
  std::vector<StateVector> out;
  const Eigen::Index dim = Eigen::Index{1} << support.size();
  for (Eigen::Index idx : indices) {
    StateVector v;
    v.support = support;
    v.amplitudes = Vector::Zero(dim);
    v.amplitudes[idx] = 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

LocalOperator GroundStateData::p_minus() const {
  const Eigen::Index dim = Eigen::Index{1} << support.size();
  LocalOperator pr;
  pr.support = support;
  pr.mat = Matrix::Zero(dim, dim);
  pr.hermitian = true;
  for (Eigen::Index idx : indices) pr.mat(idx, idx) = 1.0;
  return pr;
}

LocalOperator GroundStateData::p_plus() const {
  LocalOperator pr = p_minus();
  pr.mat = Matrix::Identity(pr.mat.rows(), pr.mat.cols()) - pr.mat;
  return pr;
}

GroundStateData ground_data(SiteSpan range, const ModelParams& p) {
  validate(p);
  const Eigen::VectorXd dc = hc_diagonal(range, p);
  const Eigen::VectorXd d0 = h0_diagonal(range, p);
  const double m = dc.minCoeff();
  const double thr = m + 1e-12 * (1.0 + std::abs(m));

  GroundStateData g;
  g.regime = p.regime();
  g.support = range;
  for (Eigen::Index b = 0; b < dc.size(); ++b)
    if (dc[b] <= thr) g.indices.push_back(b);
  // The state with spin-up at the leftmost site comes first (bit 0 clear).
  std::stable_sort(g.indices.begin(), g.indices.end(),
                   [](Eigen::Index a, Eigen::Index b) {
                     return (a & 1) < (b & 1);
                   });

  if (g.regime == Regime::ferromagnetic) {
    // h = 0 leaves all-up/all-down degenerate; the flow never gets here
    // (validate(for_flow) rejects it), and the ED-only checks want the
    // polarized representative.
    g.indices.resize(1);
    if (g.indices[0] != 0)
      throw std::runtime_error("ground_data: ferro ground state is not all-up");
  } else if (g.indices.size() != 2) {
    throw std::runtime_error(
        "ground_data: expected a two-state Neel sector, found " +
        std::to_string(g.indices.size()));
  }
  for (Eigen::Index idx : g.indices) g.energies.push_back(d0[idx]);
  return g;
}

double gap_formula(GapKind kind, const ModelParams& p, int range_sites) {
  const double j = p.j_coupling, h = p.h_field;
  if (p.regime() == Regime::ferromagnetic) {
    if (!(j / h + 1.5 < static_cast<double>(range_sites)))
      throw std::invalid_argument(
          "gap_formula: ferro requires J/h + 3/2 < range size");
    switch (kind) {
      case GapKind::hc: return 2.0 * j + h;
      case GapKind::h0:
      case GapKind::h0_restricted: return 2.0 * (j + h);
    }
  } else {
    const double aj = std::abs(j);
    if (!(aj > h))
      throw std::invalid_argument("gap_formula: AF requires |J| > h");
    const bool odd = (range_sites % 2) != 0;
    switch (kind) {
      case GapKind::hc: return 2.0 * aj - h;
      case GapKind::h0: return odd ? 2.0 * h : 2.0 * (aj - h);
      case GapKind::h0_restricted: return odd ? 2.0 * aj : 2.0 * (aj - h);
    }
  }
  throw std::logic_error("gap_formula: unreachable");
}

double gap_exact(const LocalOperator& op, int above_subspace_dim) {
  if (above_subspace_dim < 1)
    throw std::invalid_argument("gap_exact: subspace dimension must be >= 1");
  const Eigen::VectorXd w = dense_spectrum(op);
  if (w.size() <= above_subspace_dim)
    throw std::invalid_argument("gap_exact: operator too small");
  return w[above_subspace_dim] - w[0];
}

}  // namespace spinflow
