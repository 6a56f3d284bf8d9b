#pragma once

#include <optional>
#include <vector>

namespace spinflow {

// Contiguous run of 1-based chain sites, both endpoints included.
struct SiteSpan {
  int lo = 1;
  int hi = 0;

  int size() const { return hi - lo + 1; }
  bool empty() const { return hi < lo; }
  friend bool operator==(SiteSpan, SiteSpan) = default;
};

bool overlaps(SiteSpan a, SiteSpan b);
bool contains(SiteSpan outer, SiteSpan inner);
SiteSpan hull(SiteSpan a, SiteSpan b);

// Interval of the coarse grid: q is the 1-based grid slot of its left end,
// len the number of grid cells covered. It spans the sites
// [1+(q-1)*xi, 1+(q+len-1)*xi].
struct Interval {
  int q = 0;
  int len = 0;
  friend bool operator==(Interval, Interval) = default;
};

// Sweep order: shorter intervals first, ties broken by the left end.
enum class Ordering { precedes, equals, follows };
Ordering compare(Interval a, Interval b);
bool precedes(Interval a, Interval b);  // strict

// Strict-weak ordering usable as a map comparator (same order as compare()).
struct FlowLess {
  bool operator()(Interval a, Interval b) const {
    return a.len != b.len ? a.len < b.len : a.q < b.q;
  }
};

// Smallest grid interval covering both arguments.
Interval grid_hull(Interval a, Interval b);

// The three families of intervals whose conjugation remainders land on a
// given growth target during one sweep step (see Lattice::growth_sets).
struct GrowthSets {
  std::vector<Interval> active_overlaps;   // not yet processed, overlap the enlarged range
  std::vector<Interval> frozen_overlaps;   // processed, enlarged range pokes out
  std::vector<Interval> frozen_contained;  // processed, inside, but padding pokes out
};

// One-dimensional chain of `sites` spins carrying a coarse grid of spacing
// `xi`; xi must be a positive multiple of 3 and (sites-1)/xi an integer.
class Lattice {
 public:
  Lattice(int sites, int xi);

  int sites() const { return n_; }
  int xi() const { return xi_; }
  int q_max() const { return (n_ - 1) / xi_; }

  bool valid(Interval a) const;
  Interval lambda() const { return {1, q_max()}; }

  // Site ranges attached to an interval: its own sites, the xi/3-padded
  // enlargement, and the further 2-site padding (both clipped to the chain).
  SiteSpan micro(Interval a) const;
  SiteSpan star(Interval a) const;
  SiteSpan bar_star(Interval a) const;
  // Smallest grid interval whose site range covers star(a).
  Interval tilde_star(Interval a) const;

  // True when the padded range is clipped by a chain end.
  bool is_boundary(Interval a) const;

  // Shift by k grid cells; nullopt when the image leaves the grid.
  std::optional<Interval> translate(Interval a, int k) const;

  // All intervals in sweep order, the full interval last.
  std::vector<Interval> flow_order() const;
  std::optional<Interval> successor(Interval a) const;
  std::optional<Interval> predecessor(Interval a) const;

  // Given the current step i and a longer target j, the intervals whose
  // conjugation remainders enlarge onto j: unprocessed intervals overlapping
  // star(i) whose grid hull with tilde_star(i) is j; processed intervals
  // whose star overlaps star(i) without being contained, matched through
  // their tilde hulls; and (only when tilde_star(i) == j) processed
  // intervals contained in star(i) whose 2-site padding still pokes out.
  GrowthSets growth_sets(Interval i, Interval j) const;

 private:
  int n_;
  int xi_;
};

}  // namespace spinflow
