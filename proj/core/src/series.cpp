#include <spinflow/series.hpp>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace spinflow {

namespace {

// ||Z|| for the "arrow" operators Z = sum_s (x_s e_s^dag - e_s x_s^dag) with
// the x_s orthogonal to every e_s: the singular values of Z are those of the
// stacked column matrix X (each twice), so the norm comes from the tiny Gram
// matrix X^dag X instead of a full decomposition.
double arrow_norm(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  const Matrix gram = x.adjoint() * x;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  return top > 0.0 ? std::sqrt(top) : 0.0;
}

double powi(double base, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= base;
  return r;
}

}  // namespace

SeriesResult lie_schwinger_series(const Matrix& g, const Matrix& v1,
                                  const std::vector<Eigen::Index>& ground,
                                  double eps, const SeriesOptions& opts) {
  const Eigen::Index dim = g.rows();
  if (g.cols() != dim || v1.rows() != dim || v1.cols() != dim)
    throw std::invalid_argument("lie_schwinger_series: dimension mismatch");
  if (ground.empty())
    throw std::invalid_argument("lie_schwinger_series: no ground indices");
  const int ng = static_cast<int>(ground.size());

  std::vector<char> is_ground(static_cast<std::size_t>(dim), 0);
  for (Eigen::Index s : ground) {
    if (s < 0 || s >= dim)
      throw std::invalid_argument("lie_schwinger_series: ground index out of range");
    is_ground[static_cast<std::size_t>(s)] = 1;
  }

  SeriesResult res;
  const double gscale = std::max(1.0, g.norm());
  for (Eigen::Index s : ground) {
    res.ground_energies.push_back(g(s, s).real());
    // The construction presupposes that the ground states pass through G
    // untouched; a coupling here means the flow fed us a wrong G.
    const double coupling =
        std::sqrt(std::max(0.0, g.col(s).squaredNorm() - std::norm(g(s, s))));
    if (!(coupling <= opts.eigvec_tol * gscale))
      throw std::runtime_error(
          "lie_schwinger_series: ground state is not an eigenvector of G "
          "(residual " + std::to_string(coupling) + ")");
  }

  std::vector<Eigen::Index> compl_idx;
  compl_idx.reserve(static_cast<std::size_t>(dim - ng));
  for (Eigen::Index i = 0; i < dim; ++i)
    if (!is_ground[static_cast<std::size_t>(i)]) compl_idx.push_back(i);
  const Eigen::Index nc = static_cast<Eigen::Index>(compl_idx.size());
  if (nc == 0)
    throw std::invalid_argument("lie_schwinger_series: empty complement");

  Matrix gc(nc, nc);
  for (Eigen::Index a = 0; a < nc; ++a)
    for (Eigen::Index b = 0; b < nc; ++b)
      gc(a, b) = g(compl_idx[static_cast<std::size_t>(a)],
                   compl_idx[static_cast<std::size_t>(b)]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gc);
  const Eigen::VectorXd wc = es.eigenvalues();
  const Matrix& uc = es.eigenvectors();

  const double emax =
      *std::max_element(res.ground_energies.begin(), res.ground_energies.end());
  res.gap_plus = wc.minCoeff() - emax;
  if (!(res.gap_plus > opts.gap_floor))
    throw std::runtime_error("lie_schwinger_series: gap " +
                             std::to_string(res.gap_plus) +
                             " at or below the floor " +
                             std::to_string(opts.gap_floor));

  const bool v1_zero = v1.isZero(0.0);

  // Ragged tables indexed [order][p]; entry validity tracked separately so
  // identically-zero members never enter a product.
  std::vector<std::vector<Matrix>> m_table;    // products of p generators
  std::vector<std::vector<char>> m_zero;
  std::vector<Matrix> ec, ei;                  // order >= 1 coefficients of e^{+-Z}
  std::vector<char> ec_zero, ei_zero;
  std::vector<char> z_zero;
  m_table.emplace_back();  // order 0 placeholder
  m_zero.emplace_back();
  z_zero.push_back(1);

  double tau1 = -1.0;
  int j = 1;
  for (;;) {
    m_table.emplace_back(static_cast<std::size_t>(j) + 1, Matrix());
    m_zero.emplace_back(static_cast<std::size_t>(j) + 1, 1);
    // M(k,1) is the generator itself and is read from z_orders, never stored.
    const auto m_at = [&](int k, int p) -> const Matrix& {
      return p == 1 ? res.z_orders[static_cast<std::size_t>(k - 1)]
                    : m_table[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)];
    };
    const auto m_is_zero = [&](int k, int p) {
      return p == 1 ? z_zero[static_cast<std::size_t>(k)] != 0
                    : m_zero[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)] != 0;
    };
    for (int p = 2; p <= j; ++p) {
      Matrix acc;
      bool any = false;
      for (int r = 1; r <= j - p + 1; ++r) {
        if (z_zero[static_cast<std::size_t>(r)]) continue;
        if (m_is_zero(j - r, p - 1)) continue;
        const Matrix& zr = res.z_orders[static_cast<std::size_t>(r - 1)];
        const Matrix& mp = m_at(j - r, p - 1);
        if (!any) {
          acc.noalias() = zr * mp;
          any = true;
        } else {
          acc.noalias() += zr * mp;
        }
      }
      if (any) {
        m_table[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)] =
            std::move(acc);
        m_zero[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)] = 0;
      }
    }

    Matrix ehat, eihat;
    bool ehat_zero = true;
    {
      double fact = 1.0;
      for (int p = 2; p <= j; ++p) {
        fact *= p;
        if (m_zero[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)]) continue;
        const Matrix& mp =
            m_table[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)];
        const double sign = (p % 2 == 0) ? 1.0 : -1.0;
        if (ehat_zero) {
          ehat = mp / fact;
          eihat = (sign / fact) * mp;
          ehat_zero = false;
        } else {
          ehat += mp / fact;
          eihat += (sign / fact) * mp;
        }
      }
    }
    ec.push_back(ehat);
    ei.push_back(eihat);
    ec_zero.push_back(ehat_zero ? 1 : 0);
    ei_zero.push_back(ehat_zero ? 1 : 0);

    // (V)_j = sum_a (e^Z)_a G (e^-Z)_{j-a} + sum_a (e^Z)_a V1 (e^-Z)_{j-1-a},
    // with the order-j exponential coefficients still missing their Z_j part.
    Matrix vj = Matrix::Zero(dim, dim);
    const auto ec_at = [&](int a) -> const Matrix& {
      return ec[static_cast<std::size_t>(a - 1)];
    };
    const auto ei_at = [&](int a) -> const Matrix& {
      return ei[static_cast<std::size_t>(a - 1)];
    };
    const auto ec_is_zero = [&](int a) {
      return a == 0 ? false : ec_zero[static_cast<std::size_t>(a - 1)] != 0;
    };
    const auto ei_is_zero = [&](int a) {
      return a == 0 ? false : ei_zero[static_cast<std::size_t>(a - 1)] != 0;
    };
    for (int a = 0; a <= j; ++a) {
      const int b = j - a;
      if (ec_is_zero(a) || ei_is_zero(b)) continue;
      if (a == 0 && b == 0) {
        vj += g;
      } else if (a == 0) {
        vj.noalias() += g * ei_at(b);
      } else if (b == 0) {
        vj.noalias() += ec_at(a) * g;
      } else {
        vj.noalias() += ec_at(a) * (g * ei_at(b)).eval();
      }
    }
    if (!v1_zero) {
      for (int a = 0; a <= j - 1; ++a) {
        const int b = j - 1 - a;
        if (ec_is_zero(a) || ei_is_zero(b)) continue;
        if (a == 0 && b == 0) {
          vj += v1;
        } else if (a == 0) {
          vj.noalias() += v1 * ei_at(b);
        } else if (b == 0) {
          vj.noalias() += ec_at(a) * v1;
        } else {
          vj.noalias() += ec_at(a) * (v1 * ei_at(b)).eval();
        }
      }
    }

    // (Z)_j removes the ground-complement coupling of (V)_j: one resolvent
    // per ground energy, via the eigendecomposition of G on the complement.
    Matrix zj = Matrix::Zero(dim, dim);
    Matrix xcols(nc, ng);
    for (int s = 0; s < ng; ++s) {
      const Eigen::Index gs = ground[static_cast<std::size_t>(s)];
      Vector b(nc);
      for (Eigen::Index i = 0; i < nc; ++i)
        b(i) = vj(compl_idx[static_cast<std::size_t>(i)], gs);
      Vector y = uc.adjoint() * b;
      for (Eigen::Index i = 0; i < nc; ++i)
        y(i) /= (wc(i) - res.ground_energies[static_cast<std::size_t>(s)]);
      Vector x = uc * y;
      xcols.col(s) = x;
      for (Eigen::Index i = 0; i < nc; ++i) {
        zj(compl_idx[static_cast<std::size_t>(i)], gs) += x(i);
        zj(gs, compl_idx[static_cast<std::size_t>(i)]) -= std::conj(x(i));
      }
    }
    const double znorm = arrow_norm(xcols);

    Matrix vd = vj;
    for (int s = 0; s < ng; ++s) {
      const Eigen::Index gs = ground[static_cast<std::size_t>(s)];
      for (Eigen::Index i = 0; i < nc; ++i) {
        vd(compl_idx[static_cast<std::size_t>(i)], gs) = Complex{};
        vd(gs, compl_idx[static_cast<std::size_t>(i)]) = Complex{};
      }
    }

    res.z_orders.push_back(std::move(zj));
    res.v_diag_orders.push_back(std::move(vd));
    z_zero.push_back(znorm == 0.0 ? 1 : 0);

    // Complete the order-j exponential coefficients with the new generator.
    if (znorm != 0.0) {
      const Matrix& zj_ref = res.z_orders.back();
      if (ec_zero[static_cast<std::size_t>(j - 1)]) {
        ec[static_cast<std::size_t>(j - 1)] = zj_ref;
        ei[static_cast<std::size_t>(j - 1)] = -zj_ref;
        ec_zero[static_cast<std::size_t>(j - 1)] = 0;
        ei_zero[static_cast<std::size_t>(j - 1)] = 0;
      } else {
        ec[static_cast<std::size_t>(j - 1)] += zj_ref;
        ei[static_cast<std::size_t>(j - 1)] -= zj_ref;
      }
    }

    const double tau = powi(eps, j) * znorm;
    if (j == 1) {
      tau1 = tau;
      if (eps == 0.0 || tau1 == 0.0) break;
    } else if (tau < opts.trunc_rtol * tau1) {
      break;
    }
    ++j;
    if (j > opts.j_cap)
      throw std::runtime_error(
          "lie_schwinger_series: series did not converge within " +
          std::to_string(opts.j_cap) + " orders");
  }
  res.terms_used = j;

  res.z_total = Matrix::Zero(dim, dim);
  for (int m = 1; m <= res.terms_used; ++m)
    if (!z_zero[static_cast<std::size_t>(m)])
      res.z_total += powi(eps, m) * res.z_orders[static_cast<std::size_t>(m - 1)];
  res.u = expm_skew(res.z_total);

  if (opts.post_check) {
    const Matrix k1 = res.u * ((g + eps * v1) * res.u.adjoint()).eval();
    double off2 = 0.0;
    for (int s = 0; s < ng; ++s) {
      const Eigen::Index gs = ground[static_cast<std::size_t>(s)];
      for (Eigen::Index i = 0; i < nc; ++i) {
        off2 += std::norm(k1(compl_idx[static_cast<std::size_t>(i)], gs));
        off2 += std::norm(k1(gs, compl_idx[static_cast<std::size_t>(i)]));
      }
    }
    const double off = std::sqrt(off2);
    if (!(off < opts.post_check_tol))
      throw std::runtime_error(
          "lie_schwinger_series: residual ground-sector coupling " +
          std::to_string(off) + " after conjugation");
  }
  return res;
}

ColumnSeriesResult lie_schwinger_columns(
    const Eigen::VectorXd& g_diag,
    const std::function<void(const Vector&, Vector&)>& apply_v1,
    const std::vector<Eigen::Index>& ground, double eps,
    const SeriesOptions& opts) {
  const Eigen::Index dim = g_diag.size();
  if (ground.empty())
    throw std::invalid_argument("lie_schwinger_columns: no ground indices");
  const int ng = static_cast<int>(ground.size());

  std::vector<char> is_ground(static_cast<std::size_t>(dim), 0);
  ColumnSeriesResult res;
  for (Eigen::Index s : ground) {
    if (s < 0 || s >= dim)
      throw std::invalid_argument("lie_schwinger_columns: ground index out of range");
    is_ground[static_cast<std::size_t>(s)] = 1;
    res.ground_energies.push_back(g_diag(s));
  }
  const double emax =
      *std::max_element(res.ground_energies.begin(), res.ground_energies.end());
  double cmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < dim; ++i)
    if (!is_ground[static_cast<std::size_t>(i)]) cmin = std::min(cmin, g_diag(i));
  res.gap_plus = cmin - emax;
  if (!(res.gap_plus > opts.gap_floor))
    throw std::runtime_error("lie_schwinger_columns: gap " +
                             std::to_string(res.gap_plus) +
                             " at or below the floor " +
                             std::to_string(opts.gap_floor));

  // Everything below works on ground-state columns only. An order-r
  // generator is fully described by its columns x_s = (Z)_r e_{g_s}; its
  // action on any vector v is sum_s x_s v(g_s) - e_{g_s} <x_s, v>.
  const auto z_apply = [&](int r, const Vector& v) -> Vector {
    Vector out = Vector::Zero(dim);
    const auto& cols = res.z_columns[static_cast<std::size_t>(r - 1)];
    for (int s = 0; s < ng; ++s) {
      const Eigen::Index gs = ground[static_cast<std::size_t>(s)];
      const Vector& x = cols[static_cast<std::size_t>(s)];
      out += x * v(gs);
      out(gs) -= x.dot(v);
    }
    return out;
  };

  // Ehat_a v = sum_{p>=2} M(a,p) v / p! via the composition recursion,
  // seeded at v. Quadratic in a, linear in dim.
  const auto ehat_apply = [&](int a, const Vector& v) -> Vector {
    Vector out = Vector::Zero(dim);
    if (a < 2) return out;
    const int known = static_cast<int>(res.z_columns.size());
    std::vector<std::vector<Vector>> t(static_cast<std::size_t>(a) + 1);
    for (int k = 1; k <= a; ++k) {
      auto& row = t[static_cast<std::size_t>(k)];
      row.resize(static_cast<std::size_t>(k) + 1);
      // The (k,1) entry of the top row feeds nothing: the output sums p >= 2
      // and the recursion only descends. It may not even exist yet when this
      // runs mid-order, so skip it rather than reaching past the table.
      if (k <= known) row[1] = z_apply(k, v);
      for (int p = 2; p <= k; ++p) {
        Vector acc = Vector::Zero(dim);
        for (int r = 1; r <= k - p + 1; ++r) {
          const Vector& prev =
              t[static_cast<std::size_t>(k - r)][static_cast<std::size_t>(p - 1)];
          if (prev.size() == 0) continue;
          acc += z_apply(r, prev);
        }
        row[static_cast<std::size_t>(p)] = std::move(acc);
      }
    }
    double fact = 1.0;
    for (int p = 2; p <= a; ++p) {
      fact *= p;
      out += t[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] / fact;
    }
    return out;
  };

  // mv[s][k][p] = M(k,p) e_{g_s}; kept across orders.
  std::vector<std::vector<std::vector<Vector>>> mv(static_cast<std::size_t>(ng));
  for (auto& rows : mv) rows.emplace_back();  // order-0 placeholder

  const auto ei_column = [&](int b, int s, int current_order) -> Vector {
    const Eigen::Index gs = ground[static_cast<std::size_t>(s)];
    Vector out = Vector::Zero(dim);
    if (b == 0) {
      out(gs) = 1.0;
      return out;
    }
    double fact = 1.0;
    for (int p = 2; p <= b; ++p) {
      fact *= p;
      const double sign = (p % 2 == 0) ? 1.0 : -1.0;
      out += (sign / fact) *
             mv[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)]
               [static_cast<std::size_t>(p)];
    }
    if (b < current_order)
      out -= res.z_columns[static_cast<std::size_t>(b - 1)][static_cast<std::size_t>(s)];
    return out;
  };

  double tau1 = -1.0;
  int j = 1;
  Vector tmp(dim);
  for (;;) {
    // Extend the per-ground composition tables to order j.
    for (int s = 0; s < ng; ++s) {
      auto& rows = mv[static_cast<std::size_t>(s)];
      rows.emplace_back(static_cast<std::size_t>(j) + 1, Vector());
      for (int p = 2; p <= j; ++p) {
        Vector acc = Vector::Zero(dim);
        for (int r = 1; r <= j - p + 1; ++r) {
          const Vector& prev =
              rows[static_cast<std::size_t>(j - r)][static_cast<std::size_t>(p - 1)];
          if (prev.size() == 0) continue;
          acc += z_apply(r, prev);
        }
        rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)] = std::move(acc);
      }
    }

    std::vector<Vector> xs(static_cast<std::size_t>(ng));
    Matrix xmat(dim, ng);
    for (int s = 0; s < ng; ++s) {
      Vector vje = Vector::Zero(dim);
      for (int a = 0; a <= j; ++a) {
        const int b = j - a;
        Vector w = ei_column(b, s, j);
        w.array() *= g_diag.array().cast<Complex>();
        if (a == 0) {
          vje += w;
        } else {
          vje += ehat_apply(a, w);
          if (a < j) vje += z_apply(a, w);
        }
      }
      for (int a = 0; a <= j - 1; ++a) {
        const int b = j - 1 - a;
        const Vector w0 = ei_column(b, s, j);
        apply_v1(w0, tmp);
        if (a == 0) {
          vje += tmp;
        } else {
          vje += ehat_apply(a, tmp);
          if (a < j) vje += z_apply(a, tmp);
        }
      }
      // Resolvent: elementwise on the complement of the ground set.
      Vector x = Vector::Zero(dim);
      const double es = res.ground_energies[static_cast<std::size_t>(s)];
      for (Eigen::Index i = 0; i < dim; ++i)
        if (!is_ground[static_cast<std::size_t>(i)])
          x(i) = vje(i) / (g_diag(i) - es);
      xmat.col(s) = x;
      xs[static_cast<std::size_t>(s)] = std::move(x);
    }
    res.z_columns.push_back(std::move(xs));
    const double znorm = arrow_norm(xmat);
    res.z_order_norms.push_back(znorm);
    for (int s = 0; s < ng; ++s)
      mv[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)][1] =
          res.z_columns.back()[static_cast<std::size_t>(s)];

    const double tau = powi(eps, j) * znorm;
    if (j == 1) {
      tau1 = tau;
      if (eps == 0.0 || tau1 == 0.0) break;
    } else if (tau < opts.trunc_rtol * tau1) {
      break;
    }
    ++j;
    if (j > opts.j_cap)
      throw std::runtime_error(
          "lie_schwinger_columns: series did not converge within " +
          std::to_string(opts.j_cap) + " orders");
  }
  res.terms_used = j;

  if (opts.post_check) {
    // Columns of e^Z (G + eps V1) e^{-Z} on the ground states, with e^{+-Z}
    // applied by a Taylor loop on the total generator (tiny norm, fast).
    const auto z_total_apply = [&](const Vector& v) -> Vector {
      Vector out = Vector::Zero(dim);
      for (int m = 1; m <= res.terms_used; ++m) {
        if (res.z_order_norms[static_cast<std::size_t>(m - 1)] == 0.0) continue;
        out += powi(eps, m) * z_apply(m, v);
      }
      return out;
    };
    const auto exp_apply = [&](double sign, const Vector& v) -> Vector {
      Vector acc = v, term = v;
      for (int k = 1; k <= 60; ++k) {
        term = (sign / k) * z_total_apply(term);
        acc += term;
        if (term.norm() <= 1e-17 * std::max(1.0, acc.norm())) break;
      }
      return acc;
    };
    double off2 = 0.0;
    for (int s = 0; s < ng; ++s) {
      Vector e = Vector::Zero(dim);
      e(ground[static_cast<std::size_t>(s)]) = 1.0;
      Vector w = exp_apply(-1.0, e);
      Vector kw = w;
      kw.array() *= g_diag.array().cast<Complex>();
      if (eps != 0.0) {
        apply_v1(w, tmp);
        kw += eps * tmp;
      }
      Vector col = exp_apply(1.0, kw);
      for (Eigen::Index i = 0; i < dim; ++i)
        if (!is_ground[static_cast<std::size_t>(i)]) off2 += std::norm(col(i));
    }
    // The Hermitian mirror block contributes the same weight.
    const double off = std::sqrt(2.0 * off2);
    if (!(off < opts.post_check_tol))
      throw std::runtime_error(
          "lie_schwinger_columns: residual ground-sector coupling " +
          std::to_string(off) + " after conjugation");
  }
  return res;
}

}  // namespace spinflow
