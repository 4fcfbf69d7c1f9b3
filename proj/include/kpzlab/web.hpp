#pragma once

// Coalescing random walks on the even lattice {(i,n): i+n even} and the web
// distance: the least number of switches from one walk to another needed to
// travel between two space-time points.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kpzlab/lattice.hpp"
#include "kpzlab/random.hpp"

namespace kpzlab {

struct WebPoint {
  std::int64_t i = 0;  // position
  std::int64_t n = 0;  // time layer
  friend auto operator<=>(const WebPoint&, const WebPoint&) = default;
};

/// Non-negative integer or infinity. Arithmetic on infinity is not offered.
class WebDistance {
 public:
  constexpr WebDistance() = default;  // infinity
  constexpr explicit WebDistance(std::int64_t v) : v_(v) {}
  static constexpr WebDistance infinity() { return WebDistance{}; }

  constexpr bool is_finite() const noexcept { return v_ != kInf; }
  std::int64_t value() const {
    if (!is_finite()) throw std::logic_error("WebDistance: value() of infinity");
    return v_;
  }
  friend constexpr auto operator<=>(const WebDistance&, const WebDistance&) = default;
  std::string to_string() const { return is_finite() ? std::to_string(v_) : std::string("inf"); }

 private:
  static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
  std::int64_t v_ = kInf;
};

/// Seeded +-1 field on the even lattice. Values come from a hash of
/// (seed, i, n) so any point can be queried without materializing a box;
/// an optional box bounds where walks may go.
class RademacherField {
 public:
  explicit RademacherField(std::uint64_t seed) : seed_(seed) {}

  static RademacherField constant(int value) {
    RademacherField f(0);
    f.constant_ = value > 0 ? 1 : -1;
    return f;
  }

  void set_box(std::int64_t i_lo, std::int64_t i_hi, std::int64_t n_lo, std::int64_t n_hi) {
    box_ = Box{i_lo, i_hi, n_lo, n_hi};
  }
  void set(WebPoint v, int value) {
    require_even(v);
    overrides_[v] = value > 0 ? 1 : -1;
  }

  int operator()(std::int64_t i, std::int64_t n) const {
    if (!overrides_.empty())
      if (auto it = overrides_.find(WebPoint{i, n}); it != overrides_.end()) return it->second;
    if (constant_ != 0) return constant_;
    return (hash_words(seed_, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(n)}) & 1u) ? 1 : -1;
  }

  bool in_box(WebPoint v) const {
    return !box_ || (v.i >= box_->i_lo && v.i <= box_->i_hi && v.n >= box_->n_lo && v.n <= box_->n_hi);
  }
  bool has_box() const noexcept { return box_.has_value(); }

  static void require_even(WebPoint v) {
    if (!is_even(v.i + v.n)) throw std::invalid_argument("web: point off the even lattice");
  }

 private:
  struct Box {
    std::int64_t i_lo, i_hi, n_lo, n_hi;
  };
  std::uint64_t seed_ = 0;
  int constant_ = 0;
  std::optional<Box> box_;
  std::map<WebPoint, int> overrides_;
};

/// Y(j+1) = Y(j) + zeta(Y(j), j), for `steps` steps; positions Y(0..steps).
inline std::vector<std::int64_t> walk_from(const RademacherField& f, WebPoint start, std::int64_t steps) {
  RademacherField::require_even(start);
  std::vector<std::int64_t> y{start.i};
  for (std::int64_t s = 0; s < steps; ++s) {
    const WebPoint cur{y.back(), start.n + s};
    if (!f.in_box(cur) || !f.in_box({cur.i + f(cur.i, cur.n), cur.n + 1}))
      throw std::out_of_range("walk_from: walk leaves the box");
    y.push_back(cur.i + f(cur.i, cur.n));
  }
  return y;
}

namespace detail {

inline void check_cone_in_box(const RademacherField& f, WebPoint a, std::int64_t m) {
  if (!f.has_box()) return;
  for (std::int64_t t = a.n; t <= m; ++t)
    if (!f.in_box({a.i - (t - a.n), t}) || !f.in_box({a.i + (t - a.n), t}))
      throw std::out_of_range("drw: box does not cover the light cone");
}

}  // namespace detail

/// Web distances from `from` to every (j, m) with j in [j_lo, j_hi]: a layered
/// shortest path where following zeta costs 0 and stepping against it costs 1.
inline std::vector<WebDistance> drw_row(const RademacherField& f, WebPoint from, std::int64_t m,
                                        std::int64_t j_lo, std::int64_t j_hi) {
  RademacherField::require_even(from);
  std::vector<WebDistance> out(static_cast<std::size_t>(std::max<std::int64_t>(0, j_hi - j_lo + 1)));
  if (m < from.n || out.empty()) return out;
  detail::check_cone_in_box(f, from, m);
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  // Positions at layer t are from.i + (t - from.n) - 2k; index by offset from from.i - span.
  const std::int64_t span = m - from.n;
  const std::int64_t base = from.i - span;
  std::vector<std::int64_t> cur(static_cast<std::size_t>(2 * span + 1), kInf), nxt(cur.size(), kInf);
  cur[static_cast<std::size_t>(span)] = 0;
  std::int64_t lo = from.i, hi = from.i;  // occupied band
  for (std::int64_t t = from.n; t < m; ++t) {
    // Only positions that can still reach [j_lo, j_hi] by layer m matter.
    const std::int64_t left = m - t;
    const std::int64_t band_lo = std::max(lo, j_lo - left);
    const std::int64_t band_hi = std::min(hi, j_hi + left);
    std::fill(nxt.begin(), nxt.end(), kInf);
    for (std::int64_t x = band_lo + (is_even(band_lo - lo) ? 0 : 1); x <= band_hi; x += 2) {
      const std::int64_t c = cur[static_cast<std::size_t>(x - base)];
      if (c >= kInf) continue;
      const int z = f(x, t);
      auto& a = nxt[static_cast<std::size_t>(x + z - base)];
      auto& b = nxt[static_cast<std::size_t>(x - z - base)];
      a = std::min(a, c);
      b = std::min(b, c + 1);
    }
    cur.swap(nxt);
    lo -= 1;
    hi += 1;
  }
  for (std::int64_t j = j_lo; j <= j_hi; ++j) {
    if (j < base || j > base + 2 * span) continue;
    const std::int64_t c = cur[static_cast<std::size_t>(j - base)];
    if (c < kInf) out[static_cast<std::size_t>(j - j_lo)] = WebDistance(c);
  }
  return out;
}

/// D(i,n; j,m); infinity when m < n or (j,m) is outside the light cone.
inline WebDistance drw(const RademacherField& f, WebPoint from, WebPoint to) {
  RademacherField::require_even(from);
  RademacherField::require_even(to);
  if (to.n < from.n || std::abs(to.i - from.i) > to.n - from.n) return WebDistance::infinity();
  return drw_row(f, from, to.n, to.i, to.i).front();
}

/// Literal definition: choose a set of jump layers in [n, m-1]; at a jump
/// layer the path steps against zeta. D is the least size of a set whose path
/// ends at (j, m).
inline WebDistance drw_bruteforce(const RademacherField& f, WebPoint from, WebPoint to) {
  RademacherField::require_even(from);
  RademacherField::require_even(to);
  if (to.n - from.n > 10 || std::abs(to.i - from.i) > 10)
    throw std::invalid_argument("drw_bruteforce: instance exceeds the size cap");
  if (to.n < from.n) return WebDistance::infinity();
  const std::int64_t L = to.n - from.n;
  WebDistance best;
  for (std::uint32_t mask = 0; mask < (1u << L); ++mask) {
    std::int64_t x = from.i;
    for (std::int64_t s = 0; s < L; ++s) {
      const int z = f(x, from.n + s);
      x += ((mask >> s) & 1u) ? -z : z;
    }
    if (x == to.i) best = std::min(best, WebDistance(std::popcount(mask)));
  }
  return best;
}

struct WebConstants {
  double eta = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

inline WebConstants web_constants(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("web_constants: eta must lie in (0,1)");
  const double r = 1.0 - eta * eta;
  return {eta, std::pow(r, 1.0 / 6.0) / std::pow(eta / 2.0, 2.0 / 3.0), (1.0 - std::sqrt(r)) / 2.0,
          std::pow(eta, 1.0 / 3.0) * std::pow(r, 1.0 / 6.0) / std::cbrt(2.0),
          std::pow(2.0, 2.0 / 3.0) * std::pow(eta, 1.0 / 3.0) * std::pow(r, 2.0 / 3.0)};
}

/// Lattice point for real (position, layer): layer floored, position rounded
/// down to the admissible parity.
inline WebPoint web_lattice_point(double pos, double layer) {
  const auto n = static_cast<std::int64_t>(std::floor(layer + 1e-9));
  auto i = static_cast<std::int64_t>(std::floor(pos + 1e-9));
  if (!is_even(i + n)) --i;
  return {i, n};
}

/// M^eta_n(x,s; y,t) for every x in `xs` at once: the arguments are exchanged,
/// so all values share the start point determined by (y,t).
inline std::vector<double> m_eta_row(const RademacherField& f, const WebConstants& k, double n,
                                     const std::vector<double>& xs, double s, double y, double t) {
  const double n13 = std::cbrt(n), n23 = n13 * n13;
  const WebPoint from = web_lattice_point(k.eta * n * t + k.d * n23 * y, -n * t);
  std::vector<WebPoint> ends;
  std::int64_t lo = std::numeric_limits<std::int64_t>::max(), hi = std::numeric_limits<std::int64_t>::min();
  for (double x : xs) {
    ends.push_back(web_lattice_point(k.eta * n * s + k.d * n23 * x, -n * s));
    lo = std::min(lo, ends.back().i);
    hi = std::max(hi, ends.back().i);
  }
  std::vector<double> out(xs.size(), kNegInf);
  if (xs.empty() || t < s) return out;
  const auto row = drw_row(f, from, ends.front().n, lo, hi);
  for (std::size_t q = 0; q < xs.size(); ++q) {
    const WebDistance D = row[static_cast<std::size_t>(ends[q].i - lo)];
    if (!D.is_finite()) continue;
    out[q] = -k.a / n13 * (static_cast<double>(D.value()) - k.b * n * (t - s) - k.c * n23 * (y - xs[q]));
  }
  return out;
}

inline double rescale_m_eta(const RademacherField& f, const WebConstants& k, double n, double x, double s,
                            double y, double t) {
  return m_eta_row(f, k, n, {x}, s, y, t).front();
}

enum class SoftWedge { F, G };

/// Slope of the soft narrow wedge: f_n(x) = 2 n^{1/3} x, g_n(x) = c a n^{1/3} x (x <= 0).
inline double soft_wedge_slope(SoftWedge kind, double n, const WebConstants& k) {
  return kind == SoftWedge::F ? 2.0 * std::cbrt(n) : k.c * k.a * std::cbrt(n);
}

inline double soft_wedge(double slope, double x) { return x <= 0.0 ? slope * x : kNegInf; }

/// lifted(x) = max_z [wedge(z - x) + samples(z)] over the sampled z-grid.
inline double soft_wedge_lift(const std::vector<double>& z_grid, const std::vector<double>& samples, double x,
                              double slope) {
  if (z_grid.size() != samples.size()) throw std::invalid_argument("soft_wedge_lift: size mismatch");
  double best = kNegInf;
  for (std::size_t i = 0; i < z_grid.size(); ++i) {
    const double w = soft_wedge(slope, z_grid[i] - x);
    if (is_neg_inf(w) || is_neg_inf(samples[i])) continue;
    best = std::max(best, w + samples[i]);
  }
  return best;
}

/// M~(x,s; y,t) with the g_n soft wedge, the max taken over the lattice
/// columns z in [x - reach, x].
inline double soft_m_eta(const RademacherField& f, const WebConstants& k, double n, double x, double s, double y,
                         double t, double reach = 1.0) {
  const double dz = 2.0 / (k.d * std::pow(n, 2.0 / 3.0));
  std::vector<double> zs;
  for (double z = x; z >= x - reach - 1e-12; z -= dz) zs.push_back(z);
  const auto m = m_eta_row(f, k, n, zs, s, y, t);
  return soft_wedge_lift(zs, m, x, soft_wedge_slope(SoftWedge::G, n, k));
}

struct SlackReport {
  double n = 0.0;
  std::size_t chains = 0;
  std::size_t violations = 0;
  double rate() const { return chains ? static_cast<double>(violations) / static_cast<double>(chains) : 0.0; }
};

/// Fraction of sampled chains o = (x,0), p = (y,r), q = (z,1) with
/// M~(o;p) + M~(p;q) > M~(o;q) + delta; x, y, z uniform on [-1,1] and
/// r uniform on [0.2, 0.8], one fresh field per chain.
inline SlackReport soft_triangle_slack(double eta, double n, std::size_t chains, std::uint64_t seed,
                                       double delta = 0.2) {
  const auto k = web_constants(eta);
  SlackReport rep{n, chains, 0};
  for (std::size_t c = 0; c < chains; ++c) {
    const RademacherField f(hash_words(seed, {0x5ac, c}));
    CounterRng g(hash_words(seed, {0x5ad, c}));
    const double x = 2.0 * g.uniform() - 1.0, y = 2.0 * g.uniform() - 1.0, z = 2.0 * g.uniform() - 1.0;
    const double r = 0.2 + 0.6 * g.uniform();
    const double op = soft_m_eta(f, k, n, x, 0.0, y, r);
    const double pq = soft_m_eta(f, k, n, y, r, z, 1.0);
    const double oq = soft_m_eta(f, k, n, x, 0.0, z, 1.0);
    if (op + pq > oq + delta) ++rep.violations;
  }
  return rep;
}

}  // namespace kpzlab
