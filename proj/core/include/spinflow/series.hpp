#pragma once

#include <functional>
#include <vector>

#include <spinflow/local_operator.hpp>

namespace spinflow {

struct SeriesOptions {
  /// Truncate once ||(eps^j) (Z)_j|| drops below trunc_rtol times the
  /// first-order contribution.
  double trunc_rtol = 1e-14;
  /// Hard cap on the order; exceeding it raises "series did not converge".
  int j_cap = 40;
  /// Smallest admissible gap between the ground energies and the spectrum of
  /// G on the complement; resolvents are not formed below it.
  double gap_floor = 1e-6;
  /// The ground basis states must be eigencolumns of G to this tolerance
  /// (relative to the Frobenius norm); a violation signals an algorithm bug
  /// upstream, not a numerical accident.
  double eigvec_tol = 1e-10;
  /// Residual bound for the closing check that e^Z (G + eps V) e^{-Z} has no
  /// coupling left between the ground sector and its complement.
  double post_check_tol = 1e-9;
  bool post_check = true;
};

/// Order-by-order output of the block-diagonalizing series for G + eps*V.
///
/// z_orders[m-1] holds (Z)_m and v_diag_orders[m-1] holds (V)_m^diag, so the
/// generator is z_total = sum_m eps^m (Z)_m and the fully diagonalized
/// operator is G + eps * sum_m eps^{m-1} (V)_m^diag.
struct SeriesResult {
  std::vector<Matrix> z_orders;
  std::vector<Matrix> v_diag_orders;
  Matrix z_total;
  Matrix u;  // exp(z_total)
  std::vector<double> ground_energies;
  double gap_plus = 0.0;
  int terms_used = 0;
};

/// Dense construction. `ground` lists the basis indices spanning the ground
/// sector of G; each must be an exact eigencolumn. Separate resolvents are
/// formed at each ground energy, so a split ground sector (two Neel states
/// at different energies) is handled without assuming degeneracy.
SeriesResult lie_schwinger_series(const Matrix& g, const Matrix& v1,
                                  const std::vector<Eigen::Index>& ground,
                                  double eps, const SeriesOptions& opts = {});

/// Column-mode result: only the ground-state columns of each (Z)_m, which is
/// the full content of (Z)_m (it has no other nonzero entries -- see
/// z_columns docs below).
struct ColumnSeriesResult {
  /// z_columns[m-1][s] = (Z)_m e_{g_s}; (Z)_m is recovered exactly as
  /// sum_s (x_s e_s^dag - e_s x_s^dag).
  std::vector<std::vector<Vector>> z_columns;
  /// Largest singular value of each (Z)_m (equals the largest singular value
  /// of the stacked column matrix).
  std::vector<double> z_order_norms;
  std::vector<double> ground_energies;
  double gap_plus = 0.0;
  int terms_used = 0;
};

/// Same series for a *diagonal* G, never materializing a dense matrix.
/// Memory O(terms^2 * dim); usable at dimensions where the dense route
/// cannot run (first flow step at large xi). apply_v1 must be Hermitian and
/// annihilate nothing silently -- it is trusted as-is.
ColumnSeriesResult lie_schwinger_columns(
    const Eigen::VectorXd& g_diag,
    const std::function<void(const Vector&, Vector&)>& apply_v1,
    const std::vector<Eigen::Index>& ground, double eps,
    const SeriesOptions& opts = {});

}  // namespace spinflow
