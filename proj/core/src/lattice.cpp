#include "spinflow/lattice.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace spinflow {

bool overlaps(SiteSpan a, SiteSpan b) { return !(a.hi < b.lo || b.hi < a.lo); }

bool contains(SiteSpan outer, SiteSpan inner) {
  return outer.lo <= inner.lo && inner.hi <= outer.hi;
}

SiteSpan hull(SiteSpan a, SiteSpan b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

Ordering compare(Interval a, Interval b) {
  if (a == b) return Ordering::equals;
  return FlowLess{}(a, b) ? Ordering::precedes : Ordering::follows;
}

bool precedes(Interval a, Interval b) { return FlowLess{}(a, b); }

Interval grid_hull(Interval a, Interval b) {
  const int q = std::min(a.q, b.q);
  const int end = std::max(a.q + a.len, b.q + b.len);
  return {q, end - q};
}

Lattice::Lattice(int sites, int xi) : n_(sites), xi_(xi) {
  if (xi <= 0 || xi % 3 != 0)
    throw std::invalid_argument("xi must be a positive multiple of 3, got " +
                                std::to_string(xi));
  if (sites <= xi || (sites - 1) % xi != 0)
    throw std::invalid_argument("(N-1)/xi not integral: N=" +
                                std::to_string(sites) +
                                ", xi=" + std::to_string(xi));
}

bool Lattice::valid(Interval a) const {
  return a.q >= 1 && a.len >= 1 && a.q + a.len - 1 <= q_max();
}

SiteSpan Lattice::micro(Interval a) const {
  return {1 + (a.q - 1) * xi_, 1 + (a.q + a.len - 1) * xi_};
}

SiteSpan Lattice::star(Interval a) const {
  const SiteSpan m = micro(a);
  const int pad = xi_ / 3;
  return {std::max(1, m.lo - pad), std::min(n_, m.hi + pad)};
}

SiteSpan Lattice::bar_star(Interval a) const {
  const SiteSpan s = star(a);
  return {std::max(1, s.lo - 2), std::min(n_, s.hi + 2)};
}

Interval Lattice::tilde_star(Interval a) const {
  const SiteSpan s = star(a);
  // Largest grid point at or below s.lo, smallest at or above s.hi.
  const int ql = (s.lo - 1) / xi_ + 1;
  const int qr = (s.hi - 2 + xi_) / xi_ + 1;  // ceil((hi-1)/xi) + 1
  Interval t{ql, qr - ql};
  if (!valid(t))
    throw std::logic_error("tilde_star produced an off-grid interval");
  return t;
}

bool Lattice::is_boundary(Interval a) const {
  return a.q == 1 || a.q + a.len - 1 == q_max();
}

std::optional<Interval> Lattice::translate(Interval a, int k) const {
  const Interval shifted{a.q + k, a.len};
  if (!valid(shifted)) return std::nullopt;
  return shifted;
}

std::vector<Interval> Lattice::flow_order() const {
  std::vector<Interval> order;
  const int qm = q_max();
  order.reserve(static_cast<std::size_t>(qm) * (qm + 1) / 2);
  for (int len = 1; len <= qm; ++len)
    for (int q = 1; q + len - 1 <= qm; ++q) order.push_back({q, len});
  return order;
}

std::optional<Interval> Lattice::successor(Interval a) const {
  if (!valid(a)) return std::nullopt;
  if (a.q + a.len <= q_max()) return Interval{a.q + 1, a.len};
  if (a.len < q_max()) return Interval{1, a.len + 1};
  return std::nullopt;
}

std::optional<Interval> Lattice::predecessor(Interval a) const {
  if (!valid(a)) return std::nullopt;
  if (a.q > 1) return Interval{a.q - 1, a.len};
  if (a.len > 1) return Interval{q_max() - (a.len - 1) + 1, a.len - 1};
  return std::nullopt;
}

GrowthSets Lattice::growth_sets(Interval i, Interval j) const {
  GrowthSets out;
  const SiteSpan st = star(i);
  const Interval td = tilde_star(i);
  for (const Interval k : flow_order()) {
    if (precedes(i, k)) {
      if (k != j && overlaps(micro(k), st) && grid_hull(td, k) == j)
        out.active_overlaps.push_back(k);
    } else if (precedes(k, i)) {
      const SiteSpan ks = star(k);
      if (overlaps(ks, st) && !contains(st, ks) &&
          grid_hull(td, tilde_star(k)) == j)
        out.frozen_overlaps.push_back(k);
      if (td == j && contains(st, ks) && !contains(st, bar_star(k)))
        out.frozen_contained.push_back(k);
    }
  }
  return out;
}

}  // namespace spinflow
