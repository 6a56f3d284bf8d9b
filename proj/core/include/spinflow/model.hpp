#pragma once

#include <string>
#include <vector>

#include <spinflow/lattice.hpp>
#include <spinflow/local_operator.hpp>

namespace spinflow {

enum class Regime { ferromagnetic, antiferromagnetic };

/// Physical parameters of the chain.  The sign of j_coupling selects the
/// regime: J > 0 ferromagnetic (unique polarized ground state), J < 0
/// antiferromagnetic (two Neel ground states).
struct ModelParams {
  int n_sites = 10;
  int xi = 3;
  double j_coupling = 1.0;
  double h_field = 0.4;
  double t_coupling = 1e-3;

  Regime regime() const {
    return j_coupling > 0.0 ? Regime::ferromagnetic
                            : Regime::antiferromagnetic;
  }
  /// The small expansion parameter multiplying every effective potential.
  double eps() const { return xi * t_coupling; }
};

/// Validates hard constraints (throws std::invalid_argument) and returns a
/// list of soft warnings.  With `for_flow` set, additionally enforces the
/// preconditions of the block-diagonalization flow, which are stricter than
/// what plain exact diagonalization needs (e.g. ferro h > 0 and xi > J/h).
std::vector<std::string> validate(const ModelParams& p, bool for_flow = false);

/// Diagonal of the Ising Hamiltonian -J sum sz.sz - h sum sz on `range`,
/// indexed by the basis convention of LocalOperator.
Eigen::VectorXd h0_diagonal(SiteSpan range, const ModelParams& p);

/// Diagonal of the bond-wise ("combinatorial") Ising Hamiltonian
/// -sum_bonds { J sz.sz + (h/2)(sz_i + sz_{i+1}) }.  Differs from h0 by the
/// two endpoint field terms and is additive when gluing intervals that share
/// one site.
Eigen::VectorXd hc_diagonal(SiteSpan range, const ModelParams& p);

LocalOperator h0(SiteSpan range, const ModelParams& p);
LocalOperator hc(SiteSpan range, const ModelParams& p);

/// The normalized flip-flop perturbation (1/(2 xi)) sum_bonds (sx.sx + sy.sy)
/// on `range`.  Operator norm is bounded by 1 for any single-cell range.
LocalOperator v_perp(SiteSpan range, const ModelParams& p);
LocalOperator v_perp(Interval cell, const Lattice& lat, const ModelParams& p);

/// Full-chain Hamiltonian H0 + xi*t * sum of cell potentials; identical to
/// the direct XXZ construction -J sum sz.sz + (t/2) sum (sx.sx+sy.sy) - h sum sz.
/// Dense; refuses dimensions above `dense_cap`.
LocalOperator k_lambda(const ModelParams& p,
                       Eigen::Index dense_cap = Eigen::Index{1} << 13);

/// Ground sector of the combinatorial Ising Hamiltonian on a range.
///
/// Ferro: a single all-up state.  AF: the two Neel states, the one with
/// spin-up at the leftmost site ("A") listed first.  Indices refer to the
/// z-basis of the range; energies are the matching entries of h0_diagonal.
struct GroundStateData {
  Regime regime = Regime::ferromagnetic;
  SiteSpan support;
  std::vector<Eigen::Index> indices;
  std::vector<double> energies;

  int rank() const { return static_cast<int>(indices.size()); }
  std::vector<StateVector> vectors() const;
  /// Diagonal projector onto the ground sector (dense, on the range).
  LocalOperator p_minus() const;
  LocalOperator p_plus() const;
};

GroundStateData ground_data(SiteSpan range, const ModelParams& p);

enum class GapKind { h0, hc, h0_restricted };

/// Closed-form spectral gaps of the unperturbed Hamiltonians.
///
///   ferro:  h0 -> 2J+2h, hc -> 2J+h
///   AF:     hc -> 2|J|-h;  h0 -> 2|J|-2h (even-site range),
///           2h (odd, literal first gap); h0_restricted -> 2|J| (odd: distance
///           from the ground energy to the spectrum outside the two-state
///           ground sector).
/// `range_sites` supplies the parity and lets the ferro precondition
/// J/h + 3/2 < range_sites be enforced.
double gap_formula(GapKind kind, const ModelParams& p, int range_sites);

/// ED gap: E_d - E_0 with d = above_subspace_dim (1 = literal first gap,
/// 2 = distance to the spectrum above a two-dimensional ground sector, ...).
double gap_exact(const LocalOperator& op, int above_subspace_dim = 1);

}  // namespace spinflow
