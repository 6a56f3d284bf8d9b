#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <spinflow/local_operator.hpp>
#include <spinflow/model.hpp>

namespace spinflow {

struct EdOptions {
  Eigen::Index dense_cap = Eigen::Index{1} << 13;
  int max_iterations = 400;
  double tol = 1e-11;
  std::uint64_t seed = 20240801ull;
};

/// All eigenvalues, ascending. Throws on non-Hermitian input. Exactly sorts
/// the diagonal when the operator has no off-diagonal entries at all, so a
/// t = 0 spectrum is bitwise exact.
Eigen::VectorXd dense_spectrum(const LocalOperator& op);

/// Dense path when the dimension fits under opts.dense_cap, otherwise the
/// lowest `count` eigenvalues from the Lanczos path (count < 0 means "all",
/// which is an error above the cap).
Eigen::VectorXd ed_spectrum(const LocalOperator& op, int count = -1,
                            const EdOptions& opts = {});

/// Lowest eigenvalues of a Hermitian operator given only its matvec.
/// Lanczos with full reorthogonalization; deterministic for a fixed seed.
std::vector<double> lowest_eigenvalues(
    const std::function<void(const Vector&, Vector&)>& apply, Eigen::Index dim,
    int count, const EdOptions& opts = {});

std::vector<double> lowest_eigenvalues(const LocalOperator& op, int count,
                                       const EdOptions& opts = {});

/// Sizes of clusters of near-equal eigenvalues in an ascending list, two
/// eigenvalues belonging together when they differ by at most
/// rel_tol * max(1, scale). The first entry is the ground-space dimension.
std::vector<std::size_t> degenerate_cluster_sizes(const Eigen::VectorXd& eigs,
                                                  double scale,
                                                  double rel_tol = 1e-9);

/// Matrix-free matvec for the full-chain Hamiltonian; usable at sizes where
/// the dense matrix would not fit.
class ChainApply {
 public:
  explicit ChainApply(const ModelParams& p);
  Eigen::Index dim() const { return diag_.size(); }
  void operator()(const Vector& in, Vector& out) const;

 private:
  Eigen::VectorXd diag_;
  double amplitude_;  // coefficient of each flip-flop term
  int n_;
};

}  // namespace spinflow
