#include <spinflow/ed.hpp>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace spinflow {

namespace {

bool is_exactly_diagonal(const Matrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (r != c && m(r, c) != Complex{}) return false;
  return true;
}

void check_hermitian(const LocalOperator& op) {
  const double scale = op.dim() ? op.mat.cwiseAbs().maxCoeff() : 0.0;
  if (!op.hermitian && hermiticity_defect(op) > 1e-10 * std::max(1.0, scale))
    throw std::invalid_argument("ed: operator is not Hermitian");
}

// Deterministic Gaussian start vector. std::normal_distribution is not
// pinned across standard libraries, so Box-Muller on the raw engine output
// keeps byte-identical runs portable.
Vector gaussian_vector(Eigen::Index dim, std::mt19937_64& rng) {
  Vector v(dim);
  auto uniform = [&rng]() {
    // (0,1]: avoids log(0).
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53;
  };
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    v(i) = Complex(r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2));
  }
  return v;
}

}  // namespace

Eigen::VectorXd dense_spectrum(const LocalOperator& op) {
  check_hermitian(op);
  if (is_exactly_diagonal(op.mat)) {
    Eigen::VectorXd w = op.mat.diagonal().real();
    std::sort(w.data(), w.data() + w.size());
    return w;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(op.mat, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Eigen::VectorXd ed_spectrum(const LocalOperator& op, int count,
                            const EdOptions& opts) {
  if (op.dim() <= opts.dense_cap) {
    Eigen::VectorXd w = dense_spectrum(op);
    if (count >= 0 && count < w.size()) w = w.head(count).eval();
    return w;
  }
  if (count < 0)
    throw std::invalid_argument(
        "ed_spectrum: full spectrum requested above the dense cap");
  check_hermitian(op);
  const auto apply = [&op](const Vector& in, Vector& out) {
    out.noalias() = op.mat * in;
  };
  const std::vector<double> low = lowest_eigenvalues(apply, op.dim(), count, opts);
  Eigen::VectorXd w(static_cast<Eigen::Index>(low.size()));
  for (std::size_t i = 0; i < low.size(); ++i)
    w(static_cast<Eigen::Index>(i)) = low[i];
  return w;
}

std::vector<double> lowest_eigenvalues(
    const std::function<void(const Vector&, Vector&)>& apply, Eigen::Index dim,
    int count, const EdOptions& opts) {
  if (count < 1) throw std::invalid_argument("lowest_eigenvalues: count < 1");
  if (dim <= 2 * count + 2 || dim <= 32) {
    // Build the matrix column by column; cheaper than special-casing tiny dims.
    Matrix m(dim, dim);
    Vector e = Vector::Zero(dim), col(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      e(j) = 1.0;
      apply(e, col);
      m.col(j) = col;
      e(j) = 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    std::vector<double> out;
    for (int i = 0; i < count && i < dim; ++i) out.push_back(es.eigenvalues()(i));
    return out;
  }

  std::mt19937_64 rng(opts.seed);
  std::vector<Vector> basis;
  basis.reserve(static_cast<std::size_t>(opts.max_iterations) + 1);
  {
    Vector v0 = gaussian_vector(dim, rng);
    v0.normalize();
    basis.push_back(std::move(v0));
  }
  std::vector<double> alpha, beta;  // beta[k] couples basis k and k+1
  std::vector<double> prev_ritz;
  Vector w(dim);

  const auto reorthogonalize = [&basis](Vector& x) {
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& b : basis) x -= b.dot(x) * b;
  };

  for (int k = 0; k < opts.max_iterations; ++k) {
    apply(basis.back(), w);
    alpha.push_back(basis.back().dot(w).real());
    reorthogonalize(w);
    double b = w.norm();
    if (b < 1e-13 * std::max(1.0, std::abs(alpha[0]))) {
      // Invariant subspace: restart in its orthogonal complement. A zero
      // beta cleanly splits the tridiagonal matrix into blocks.
      if (static_cast<Eigen::Index>(basis.size()) >= dim) break;
      Vector fresh = gaussian_vector(dim, rng);
      reorthogonalize(fresh);
      const double fn = fresh.norm();
      if (fn < 1e-13) break;
      w = fresh / fn;
      b = 0.0;
    } else {
      w /= b;
    }
    beta.push_back(b);
    basis.push_back(w);

    const int m = static_cast<int>(alpha.size());
    if (m >= count + 2 && (k % 5 == 4 || k == opts.max_iterations - 1)) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) {
          t(i, i + 1) = beta[static_cast<std::size_t>(i)];
          t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
      std::vector<double> ritz(static_cast<std::size_t>(count));
      for (int i = 0; i < count; ++i) ritz[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
      double scale = 1.0;
      for (double a : alpha) scale = std::max(scale, std::abs(a));
      for (double bb : beta) scale = std::max(scale, std::abs(bb));
      if (!prev_ritz.empty()) {
        double change = 0.0;
        for (int i = 0; i < count; ++i)
          change = std::max(change,
                            std::abs(ritz[static_cast<std::size_t>(i)] -
                                     prev_ritz[static_cast<std::size_t>(i)]));
        if (change <= opts.tol * scale) return ritz;
      }
      prev_ritz = std::move(ritz);
    }
  }
  if (prev_ritz.empty())
    throw std::runtime_error("lowest_eigenvalues: Krylov iteration produced no estimate");
  return prev_ritz;
}

std::vector<double> lowest_eigenvalues(const LocalOperator& op, int count,
                                       const EdOptions& opts) {
  check_hermitian(op);
  const auto apply = [&op](const Vector& in, Vector& out) {
    out.noalias() = op.mat * in;
  };
  return lowest_eigenvalues(apply, op.dim(), count, opts);
}

std::vector<std::size_t> degenerate_cluster_sizes(const Eigen::VectorXd& eigs,
                                                  double scale, double rel_tol) {
  std::vector<std::size_t> sizes;
  if (eigs.size() == 0) return sizes;
  const double thr = rel_tol * std::max(1.0, scale);
  std::size_t run = 1;
  for (Eigen::Index i = 1; i < eigs.size(); ++i) {
    if (eigs(i) - eigs(i - 1) <= thr) {
      ++run;
    } else {
      sizes.push_back(run);
      run = 1;
    }
  }
  sizes.push_back(run);
  return sizes;
}

ChainApply::ChainApply(const ModelParams& p) : n_(p.n_sites) {
  validate(p);
  diag_ = h0_diagonal(SiteSpan{1, p.n_sites}, p);
  amplitude_ = p.t_coupling;
}

void ChainApply::operator()(const Vector& in, Vector& out) const {
  out.array() = diag_.array().cast<Complex>() * in.array();
  if (amplitude_ == 0.0) return;
  const Eigen::Index dim = in.size();
  for (int i = 0; i + 1 < n_; ++i) {
    const Eigen::Index mask = Eigen::Index{3} << i;
    for (Eigen::Index b = 0; b < dim; ++b) {
      const int bi = static_cast<int>((b >> i) & 1);
      const int bn = static_cast<int>((b >> (i + 1)) & 1);
      if (bi != bn) out(b) += amplitude_ * in(b ^ mask);
    }
  }
}

}  // namespace spinflow
