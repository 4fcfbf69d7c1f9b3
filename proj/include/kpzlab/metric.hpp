#pragma once

// The TASEP directed metric d(x,s;y,t): the height at (y,t) of the narrow
// wedge started at (x,s), all wedges sharing one clock realization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kpzlab/clock.hpp"
#include "kpzlab/exclusion.hpp"
#include "kpzlab/lattice.hpp"

namespace kpzlab {

struct SpaceTime {
  Site x = 0;
  double t = 0.0;
  friend bool operator==(const SpaceTime&, const SpaceTime&) = default;
};

/// Values d(source; target) on a finite set of space-time points.
struct MetricSampleGrid {
  std::vector<SpaceTime> sources;
  std::vector<SpaceTime> targets;
  std::vector<ExtInt> values;  // row-major: sources x targets
  std::uint64_t seed = 0;

  ExtInt& at(std::size_t i, std::size_t j) { return values[i * targets.size() + j]; }
  ExtInt at(std::size_t i, std::size_t j) const { return values[i * targets.size() + j]; }
};

/// Scaled view: real space-time points, real values, -inf allowed.
struct ScaledMetricGrid {
  double eps = 1.0;
  std::vector<std::pair<double, double>> sources;  // (x, s)
  std::vector<std::pair<double, double>> targets;  // (y, t)
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * targets.size() + j]; }
};

/// The window of a metric computation and its TASEP clock. A ring at flip
/// site y is an event of stream (y-1, +1); rings at the window edges are inert.
struct TasepWindow {
  Site lo = 0;
  Site hi = 0;

  void validate() const {
    if (hi - lo < 2) throw std::invalid_argument("TasepWindow: window needs at least 3 sites");
  }
  bool certified(Site x, double elapsed) const {
    return certified_region(lo, hi, 1, elapsed).contains(x);
  }
};

inline double tasep_ring_rate(const StreamKey&) { return 1.0; }

/// Rings (time, flip site) in (s, t], time-ordered, ties by site.
inline std::vector<std::pair<double, Site>> tasep_rings(const ClockField& clock, TasepWindow w, double s,
                                                         double t) {
  std::vector<std::pair<double, Site>> out;
  for (Site y = w.lo + 1; y <= w.hi - 1; ++y)
    for (double r : events_in(clock.stream(basic_key(y - 1, 1), 1.0), s, t)) out.emplace_back(r, y);
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

inline void require_certified(TasepWindow w, const SpaceTime& src, const SpaceTime& dst) {
  if (dst.t < src.t) return;
  const double dt = dst.t - src.t;
  if (!w.certified(src.x, dt) || !w.certified(dst.x, dt))
    throw std::invalid_argument("metric: point outside the certified region");
}

}  // namespace detail

/// d(x,s;y,t) = h_t(y; Delta_x, s) by coupled narrow-wedge evolution.
inline MetricSampleGrid dpi_by_evolution(const ClockField& clock, TasepWindow w,
                                         const std::vector<SpaceTime>& sources,
                                         const std::vector<SpaceTime>& targets, bool require_cert = true) {
  w.validate();
  MetricSampleGrid grid{sources, targets, std::vector<ExtInt>(sources.size() * targets.size()),
                        clock.master_seed()};
  for (std::size_t i = 0; i < sources.size(); ++i)
    for (std::size_t j = 0; j < targets.size(); ++j)
      if (require_cert) detail::require_certified(w, sources[i], targets[j]);

  std::map<double, std::vector<std::size_t>> by_start;
  for (std::size_t i = 0; i < sources.size(); ++i) by_start[sources[i].t].push_back(i);

  std::vector<std::size_t> order(targets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return targets[a].t < targets[b].t; });

  for (const auto& [s, idx] : by_start) {
    std::vector<HeightFunction> wedges;
    for (auto i : idx) wedges.push_back(narrow_wedge(sources[i].x, w.lo, w.hi));
    CoupledEnsemble ens(std::move(wedges), clock, s);
    ens.set_logging(false);
    BasicEngine engine(ens, JumpDistribution::tasep());
    for (auto j : order) {
      const SpaceTime& q = targets[j];
      if (q.t < s) continue;  // stays -inf
      engine.advance(q.t);
      for (std::size_t c = 0; c < idx.size(); ++c) grid.at(idx[c], j) = ens.height(c, q.x);
    }
  }
  return grid;
}

inline ExtInt dpi(const ClockField& clock, TasepWindow w, SpaceTime src, SpaceTime dst) {
  return dpi_by_evolution(clock, w, {src}, {dst}).at(0, 0);
}

/// A piecewise-constant integer path; jumps are (time, new position) with
/// strictly increasing times in (s, t].
struct LatticePath {
  SpaceTime start;
  SpaceTime end;
  std::vector<std::pair<double, Site>> jumps;

  std::int64_t variation() const {
    std::int64_t v = 0;
    Site cur = start.x;
    for (const auto& [r, z] : jumps) {
      v += std::abs(z - cur);
      cur = z;
    }
    return v + std::abs(end.x - cur);
  }
};

/// l(gamma) = -V(gamma) - 2 #{rings at gamma(r) at times r where gamma does not jump}.
/// A final relocation to end.x is taken at time end.t.
inline std::int64_t path_length(const LatticePath& g, const ClockField& clock, TasepWindow w) {
  for (std::size_t i = 0; i < g.jumps.size(); ++i) {
    const double r = g.jumps[i].first;
    if (!(r > g.start.t && r <= g.end.t) || (i > 0 && !(r > g.jumps[i - 1].first)))
      throw std::invalid_argument("path_length: jump times must increase inside (s,t]");
  }
  std::int64_t penalty = 0;
  for (const auto& [r, y] : tasep_rings(clock, w, g.start.t, g.end.t)) {
    Site pos = g.start.x;
    bool jumps_here = false;
    for (const auto& [jr, z] : g.jumps) {
      if (jr < r) pos = z;
      if (jr == r) jumps_here = true;
    }
    const bool final_move = (r == g.end.t) && (pos != g.end.x);
    if (!jumps_here && !final_move && pos == y) ++penalty;
  }
  return -g.variation() - 2 * penalty;
}

/// Maximal path length by dynamic programming over the ring skeleton.
/// Between rings the optimal path is constant; at a ring at site y the path
/// may relocate (paying the distance) or stay (paying 2 if it stays at y).
inline std::vector<ExtInt> dpi_by_dp(const ClockField& clock, TasepWindow w, SpaceTime source,
                                     const std::vector<SpaceTime>& targets) {
  w.validate();
  const auto n = static_cast<std::size_t>(w.hi - w.lo + 1);
  double t_max = source.t;
  for (const auto& q : targets) t_max = std::max(t_max, q.t);
  const auto rings = tasep_rings(clock, w, source.t, t_max);

  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = -std::abs(static_cast<double>(w.lo + static_cast<Site>(i) - source.x));

  std::vector<std::size_t> order(targets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return targets[a].t < targets[b].t; });

  std::vector<ExtInt> out(targets.size());
  std::size_t k = 0;
  std::vector<double> hull(n);
  for (auto j : order) {
    const SpaceTime& q = targets[j];
    if (q.t < source.t) continue;
    for (; k < rings.size() && rings[k].first <= q.t; ++k) {
      const auto y = static_cast<std::size_t>(rings[k].second - w.lo);
      hull = v;
      hull[y] = kNegInf;
      detail::cone_hull(hull);
      const double vy = v[y];
      for (std::size_t z = 0; z < n; ++z) {
        const double via_y = z == y ? vy - 2.0 : vy - std::abs(static_cast<double>(z) - static_cast<double>(y));
        hull[z] = std::max(hull[z], via_y);
      }
      v.swap(hull);
    }
    // Free relocation at the final time.
    double best = kNegInf;
    for (std::size_t z = 0; z < n; ++z)
      best = std::max(best, v[z] - std::abs(static_cast<double>(w.lo + static_cast<Site>(z) - q.x)));
    out[j] = static_cast<std::int64_t>(best);
  }
  return out;
}

/// Max-plus kernel K(x,y) = d(x,s;y,t) for all window sites.
inline Kernel metric_kernel(const ClockField& clock, TasepWindow w, double s, double t) {
  std::vector<SpaceTime> src, dst;
  for (Site x = w.lo; x <= w.hi; ++x) {
    src.push_back({x, s});
    dst.push_back({x, t});
  }
  const auto g = dpi_by_evolution(clock, w, src, dst, false);
  Kernel k(src.size(), dst.size());
  for (std::size_t i = 0; i < src.size(); ++i)
    for (std::size_t j = 0; j < dst.size(); ++j) k(i, j) = g.at(i, j).as_double();
  return k;
}

struct VariationalReport {
  bool ok = true;
  std::size_t sites_checked = 0;
  std::optional<Site> first_mismatch;
};

/// h_t(y; h0, s) = max_x [h0(x) + d(x,s;y,t)] on the certified region.
inline VariationalReport variational_check(const ClockField& clock, const HeightFunction& h0, double s, double t) {
  const TasepWindow w{h0.lo(), h0.hi()};
  CoupledEnsemble ens({h0}, clock, s);
  ens.set_logging(false);
  BasicEngine(ens, JumpDistribution::tasep()).advance(t);
  const Kernel d = metric_kernel(clock, w, s, t);
  const std::vector<double> rhs = [&] {
    std::vector<double> f;
    for (Height v : h0.values()) f.push_back(static_cast<double>(v));
    return diamond(f, d);
  }();
  VariationalReport rep;
  const auto cert = certified_region(w.lo, w.hi, 1, t - s);
  for (Site y = cert.lo; y <= cert.hi && !cert.empty(); ++y) {
    ++rep.sites_checked;
    if (static_cast<double>(ens.height(0, y)) != rhs[static_cast<std::size_t>(y - w.lo)]) {
      rep.ok = false;
      if (!rep.first_mismatch) rep.first_mismatch = y;
    }
  }
  return rep;
}

/// d^eps(x,s;y,t) = eps^{1/2} d(2x/eps, 2 eps^{-3/2} s; 2y/eps, 2 eps^{-3/2} t) + (t - s)/eps,
/// reported at the scaled coordinates of the lattice points.
inline ScaledMetricGrid rescale_dpi(const MetricSampleGrid& grid, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("rescale_dpi: scale must be positive");
  ScaledMetricGrid out;
  out.eps = eps;
  const double u = std::sqrt(eps);
  const double tscale = std::pow(eps, 1.5) / 2.0;
  for (const auto& p : grid.sources) out.sources.emplace_back(eps * static_cast<double>(p.x) / 2.0, p.t * tscale);
  for (const auto& p : grid.targets) out.targets.emplace_back(eps * static_cast<double>(p.x) / 2.0, p.t * tscale);
  out.values.resize(grid.values.size());
  for (std::size_t i = 0; i < grid.sources.size(); ++i)
    for (std::size_t j = 0; j < grid.targets.size(); ++j) {
      const ExtInt d = grid.at(i, j);
      const double dt = out.targets[j].second - out.sources[i].second;
      out.values[i * grid.targets.size() + j] = d.is_finite() ? u * static_cast<double>(d.value()) + dt / eps : kNegInf;
    }
  return out;
}

/// Lattice space-time point of a scaled point.
inline SpaceTime lattice_point(double x, double s, double eps) {
  return {lattice_site(x, eps), 2.0 * s / std::pow(eps, 1.5)};
}

/// One-point scaled sample d^eps(x,s;y,t) with a window wide enough that the
/// boundary cannot reach either endpoint.
inline double scaled_dpi(const ClockField& clock, double eps, double x, double s, double y, double t) {
  const SpaceTime a = lattice_point(x, s, eps);
  const SpaceTime b = lattice_point(y, t, eps);
  const auto margin = static_cast<Site>(std::ceil(4.0 * (b.t - a.t))) + 2;
  const TasepWindow w{std::min(a.x, b.x) - margin, std::max(a.x, b.x) + margin};
  const ExtInt d = dpi(clock, w, a, b);
  return d.is_finite() ? std::sqrt(eps) * static_cast<double>(d.value()) + (t - s) / eps : kNegInf;
}

struct TriangleReport {
  std::size_t chains = 0;
  std::size_t violations = 0;
  std::int64_t worst_excess = 0;  // max of d(o;p)+d(p;q)-d(o;q) over violations
};

/// Counts chains o -> p -> q (s < r < t, p both a target and a source) with
/// d(o;p) + d(p;q) > d(o;q).
inline TriangleReport triangle_audit(const MetricSampleGrid& g) {
  TriangleReport rep;
  for (std::size_t pt = 0; pt < g.targets.size(); ++pt) {
    const SpaceTime& p = g.targets[pt];
    const auto ps = std::find(g.sources.begin(), g.sources.end(), p);
    if (ps == g.sources.end()) continue;
    const auto pi = static_cast<std::size_t>(ps - g.sources.begin());
    for (std::size_t o = 0; o < g.sources.size(); ++o) {
      if (!(g.sources[o].t < p.t)) continue;
      for (std::size_t q = 0; q < g.targets.size(); ++q) {
        if (!(g.targets[q].t > p.t)) continue;
        ++rep.chains;
        const ExtInt lhs = g.at(o, pt) + g.at(pi, q);
        const ExtInt rhs = g.at(o, q);
        if (rhs < lhs) {
          ++rep.violations;
          const std::int64_t excess = rhs.is_finite() ? lhs.value() - rhs.value() : std::numeric_limits<std::int64_t>::max();
          rep.worst_excess = std::max(rep.worst_excess, excess);
        }
      }
    }
  }
  return rep;
}

}  // namespace kpzlab
