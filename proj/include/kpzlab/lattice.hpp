#pragma once

// Discrete function spaces: height functions, particle configurations,
// scaled grid functions, narrow-wedge combinations and max-plus kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kpzlab/random.hpp"

namespace kpzlab {

using Site = std::int64_t;
using Height = std::int64_t;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline bool is_neg_inf(double v) noexcept { return v == kNegInf; }

inline bool is_even(std::int64_t v) noexcept { return (v & 1) == 0; }

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

/// Integer extended by a distinguished -infinity. Addition absorbs -inf.
class ExtInt {
 public:
  constexpr ExtInt() = default;  // -inf
  constexpr ExtInt(std::int64_t v) : finite_(true), v_(v) {}  // NOLINT implicit

  static constexpr ExtInt neg_inf() { return ExtInt{}; }

  constexpr bool is_finite() const noexcept { return finite_; }
  std::int64_t value() const {
    if (!finite_) throw std::logic_error("ExtInt: value() of -inf");
    return v_;
  }
  double as_double() const noexcept { return finite_ ? static_cast<double>(v_) : kNegInf; }

  friend constexpr ExtInt operator+(ExtInt a, ExtInt b) {
    if (!a.finite_ || !b.finite_) return ExtInt{};
    return ExtInt{a.v_ + b.v_};
  }
  friend constexpr bool operator==(ExtInt a, ExtInt b) {
    return a.finite_ == b.finite_ && (!a.finite_ || a.v_ == b.v_);
  }
  friend constexpr bool operator<(ExtInt a, ExtInt b) {
    if (!b.finite_) return false;
    if (!a.finite_) return true;
    return a.v_ < b.v_;
  }
  friend constexpr bool operator<=(ExtInt a, ExtInt b) { return !(b < a); }
  friend constexpr ExtInt max(ExtInt a, ExtInt b) { return a < b ? b : a; }

  std::string to_string() const { return finite_ ? std::to_string(v_) : std::string("-inf"); }

 private:
  bool finite_ = false;
  std::int64_t v_ = 0;
};

// ---------------------------------------------------------------------------
// Height functions and particle configurations
// ---------------------------------------------------------------------------

enum class BoundaryPolicy {
  WedgeExtension,  // beyond the window the profile falls with slope -1 on both sides
  FrozenSlope      // beyond the window the last boundary increment repeats
};

/// Integer profile with +-1 increments on the window [lo, hi].
///
/// The parity anchor (h(0) even, equivalently h(x) = x mod 2) is not forced at
/// construction: narrow wedges at odd apexes are legitimate metric sources.
/// Operations that rely on particle/hole labels call require_even_anchor().
class HeightFunction {
 public:
  HeightFunction() = default;

  HeightFunction(Site lo, std::vector<Height> values,
                 BoundaryPolicy policy = BoundaryPolicy::WedgeExtension)
      : lo_(lo), values_(std::move(values)), policy_(policy) {
    if (values_.empty()) throw std::invalid_argument("HeightFunction: empty window");
    for (std::size_t i = 1; i < values_.size(); ++i) {
      const Height d = values_[i] - values_[i - 1];
      if (d != 1 && d != -1) {
        throw std::invalid_argument("HeightFunction: increment at site " +
                                    std::to_string(lo_ + static_cast<Site>(i)) + " is not +-1");
      }
    }
  }

  Site lo() const noexcept { return lo_; }
  Site hi() const noexcept { return lo_ + static_cast<Site>(values_.size()) - 1; }
  std::size_t size() const noexcept { return values_.size(); }
  bool contains(Site x) const noexcept { return x >= lo() && x <= hi(); }
  BoundaryPolicy boundary_policy() const noexcept { return policy_; }
  std::span<const Height> values() const noexcept { return values_; }

  Height operator()(Site x) const {
    if (!contains(x)) {
      throw std::out_of_range("HeightFunction: site " + std::to_string(x) + " outside [" +
                              std::to_string(lo()) + ", " + std::to_string(hi()) + "]");
    }
    return values_[static_cast<std::size_t>(x - lo_)];
  }

  Height at_extended(Site x) const {
    if (contains(x)) return (*this)(x);
    if (policy_ == BoundaryPolicy::WedgeExtension) {
      return x > hi() ? values_.back() - (x - hi()) : values_.front() - (lo() - x);
    }
    if (values_.size() < 2) return values_.front();
    if (x > hi()) return values_.back() + (values_.back() - values_[values_.size() - 2]) * (x - hi());
    return values_.front() - (values_[1] - values_[0]) * (lo() - x);
  }

  bool has_even_anchor() const noexcept { return is_even(values_.front() - lo_); }

  void require_even_anchor() const {
    if (!has_even_anchor()) throw std::invalid_argument("HeightFunction: h(0) is not even");
  }

  // Pointwise h <= other on the common window.
  bool dominated_by(const HeightFunction& other) const {
    const Site a = std::max(lo(), other.lo());
    const Site b = std::min(hi(), other.hi());
    for (Site x = a; x <= b; ++x)
      if ((*this)(x) > other(x)) return false;
    return true;
  }

  friend bool operator==(const HeightFunction& a, const HeightFunction& b) {
    return a.lo_ == b.lo_ && a.values_ == b.values_;
  }

 private:
  Site lo_ = 0;
  std::vector<Height> values_{0};
  BoundaryPolicy policy_ = BoundaryPolicy::WedgeExtension;
};

/// eta(x) in {0,1} on sites lo .. lo+n-1; heights live on lo .. lo+n.
struct ParticleConfig {
  Site lo = 0;
  std::vector<std::uint8_t> occupancy;
  Height anchor_height = 0;

  Site hi() const noexcept { return lo + static_cast<Site>(occupancy.size()) - 1; }
  friend bool operator==(const ParticleConfig&, const ParticleConfig&) = default;
};

inline HeightFunction height_from_particles(const ParticleConfig& cfg) {
  std::vector<Height> h(cfg.occupancy.size() + 1);
  h[0] = cfg.anchor_height;
  for (std::size_t i = 0; i < cfg.occupancy.size(); ++i) {
    if (cfg.occupancy[i] > 1) throw std::invalid_argument("ParticleConfig: occupancy not a bit");
    h[i + 1] = h[i] + 2 * static_cast<Height>(cfg.occupancy[i]) - 1;
  }
  return HeightFunction(cfg.lo, std::move(h));
}

inline ParticleConfig particles_from_height(const HeightFunction& h) {
  ParticleConfig cfg;
  cfg.lo = h.lo();
  cfg.anchor_height = h(h.lo());
  const auto v = h.values();
  cfg.occupancy.resize(v.size() - 1);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) cfg.occupancy[i] = v[i + 1] > v[i] ? 1 : 0;
  return cfg;
}

/// Delta_{x0}(y) = -|x0 - y| on [lo, hi].
inline HeightFunction narrow_wedge(Site x0, Site lo, Site hi) {
  if (x0 < lo || x0 > hi) throw std::invalid_argument("narrow_wedge: apex outside window");
  std::vector<Height> v(static_cast<std::size_t>(hi - lo + 1));
  for (Site y = lo; y <= hi; ++y) v[static_cast<std::size_t>(y - lo)] = -std::abs(x0 - y);
  return HeightFunction(lo, std::move(v));
}

/// x -> h(x - space_shift) + height_shift; the window moves with the profile.
inline HeightFunction shift_map(const HeightFunction& h, Site space_shift, Height height_shift) {
  std::vector<Height> v(h.values().begin(), h.values().end());
  for (auto& e : v) e += height_shift;
  HeightFunction out(h.lo() + space_shift, std::move(v), h.boundary_policy());
  if (h.has_even_anchor() && !out.has_even_anchor()) {
    throw std::invalid_argument("shift_map: shifted profile violates the h(0) parity anchor");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scaled grid functions
// ---------------------------------------------------------------------------

/// Samples on the grid {eps * i / 2 : i in [lo, hi]}. -inf entries allowed.
/// A walk-tagged function is an element of SRW_eps restricted to the grid.
class GridFunction {
 public:
  GridFunction() = default;

  GridFunction(double eps, Site lo, std::vector<double> samples, bool walk = false)
      : eps_(eps), lo_(lo), samples_(std::move(samples)), walk_(walk) {
    if (!(eps_ > 0.0)) throw std::invalid_argument("GridFunction: scale must be positive");
    if (samples_.empty()) throw std::invalid_argument("GridFunction: empty grid");
    if (walk_) validate_walk();
  }

  double eps() const noexcept { return eps_; }
  Site lo() const noexcept { return lo_; }
  Site hi() const noexcept { return lo_ + static_cast<Site>(samples_.size()) - 1; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool is_walk() const noexcept { return walk_; }
  bool contains(Site i) const noexcept { return i >= lo() && i <= hi(); }
  double position(Site i) const noexcept { return eps_ * static_cast<double>(i) / 2.0; }
  std::span<const double> samples() const noexcept { return samples_; }

  double operator()(Site i) const {
    if (!contains(i)) throw std::out_of_range("GridFunction: index outside grid");
    return samples_[static_cast<std::size_t>(i - lo_)];
  }

  friend bool operator==(const GridFunction&, const GridFunction&) = default;

 private:
  void validate_walk() const {
    const double u = std::sqrt(eps_);
    const double tol = 1e-9 * std::max(1.0, u);
    for (std::size_t i = 1; i < samples_.size(); ++i) {
      const double d = samples_[i] - samples_[i - 1];
      if (!(std::abs(std::abs(d) - u) <= tol)) {
        throw std::invalid_argument("GridFunction: walk slope is not +-2 eps^{-1/2}");
      }
    }
    // Parity: value at index i is in (i + 2Z) * eps^{1/2}.
    const double k = samples_.front() / u;
    const double r = std::round(k);
    if (std::abs(k - r) > 1e-6 ||
        !is_even(static_cast<std::int64_t>(r) - lo_)) {
      throw std::invalid_argument("GridFunction: walk violates the value-at-0 parity constraint");
    }
  }

  double eps_ = 1.0;
  Site lo_ = 0;
  std::vector<double> samples_{0.0};
  bool walk_ = false;
};

/// f = max_i (delta_{x_i} + q_i) with finitely many real support points.
struct NarrowWedgeCombo {
  std::vector<double> points;
  std::vector<double> heights;

  double operator()(double x) const {
    double v = kNegInf;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (points[i] == x) v = std::max(v, heights[i]);
    return v;
  }
};

/// Nearest even lattice site to 2x/eps, ties toward -inf.
inline Site lattice_site(double x, double eps) {
  const double v = 2.0 * x / eps;
  const double lower = 2.0 * std::floor(v / 2.0);
  const double upper = lower + 2.0;
  return static_cast<Site>((v - lower) <= (upper - v) ? lower : upper);
}

namespace detail {

// Smallest integer >= v whose parity matches site i (tolerant to rounding).
inline double parity_ceil(double v, Site i) {
  double c = std::ceil(v - 1e-9);
  if (!is_even(static_cast<std::int64_t>(c) - i)) c += 1.0;
  return c;
}

// In-place sup-convolution with -|.| (unit slope) over a dense vector.
inline void cone_hull(std::vector<double>& g) {
  for (std::size_t i = 1; i < g.size(); ++i) g[i] = std::max(g[i], g[i - 1] - 1.0);
  for (std::size_t i = g.size() - 1; i-- > 0;) g[i] = std::max(g[i], g[i + 1] - 1.0);
}

inline GridFunction envelope_from_lattice_bounds(std::vector<double> bound, double eps, Site lo) {
  bool any = false;
  for (std::size_t j = 0; j < bound.size(); ++j) {
    if (is_neg_inf(bound[j])) continue;
    any = true;
    bound[j] = parity_ceil(bound[j], lo + static_cast<Site>(j));
  }
  if (!any) throw std::invalid_argument("srw_envelope: no finite support");
  cone_hull(bound);
  const double u = std::sqrt(eps);
  for (auto& v : bound) v *= u;
  return GridFunction(eps, lo, std::move(bound), true);
}

}  // namespace detail

/// Minimal SRW_eps walk dominating a narrow-wedge combination, on [lo, hi].
inline GridFunction srw_envelope(const NarrowWedgeCombo& f, double eps, Site lo, Site hi) {
  if (!(eps > 0.0)) throw std::invalid_argument("srw_envelope: scale must be positive");
  if (f.points.empty() || f.points.size() != f.heights.size())
    throw std::invalid_argument("srw_envelope: no finite support");
  const double u = std::sqrt(eps);
  std::vector<double> bound(static_cast<std::size_t>(hi - lo + 1), kNegInf);
  for (std::size_t p = 0; p < f.points.size(); ++p) {
    if (is_neg_inf(f.heights[p])) continue;
    const double xi = 2.0 * f.points[p] / eps;
    const double q = f.heights[p] / u;
    for (Site i = lo; i <= hi; ++i) {
      auto& b = bound[static_cast<std::size_t>(i - lo)];
      b = std::max(b, q - std::abs(static_cast<double>(i) - xi));
    }
  }
  return detail::envelope_from_lattice_bounds(std::move(bound), eps, lo);
}

/// Minimal SRW_eps walk dominating the finite samples of a grid function.
inline GridFunction srw_envelope(const GridFunction& f) {
  const double u = std::sqrt(f.eps());
  std::vector<double> bound(f.samples().begin(), f.samples().end());
  for (auto& b : bound)
    if (!is_neg_inf(b)) b /= u;
  return detail::envelope_from_lattice_bounds(std::move(bound), f.eps(), f.lo());
}

/// x -> eps^{1/2} h(2 x / eps) + t / eps. Grid index i corresponds to site i.
inline GridFunction rescale_height(const HeightFunction& h, double t, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("rescale_height: scale must be positive");
  const double u = std::sqrt(eps);
  std::vector<double> out;
  out.reserve(h.size());
  for (Height v : h.values()) out.push_back(u * static_cast<double>(v) + t / eps);
  return GridFunction(eps, h.lo(), std::move(out), false);
}

/// A_eps: SRW -> SRW_eps.
inline GridFunction scale_walk(const HeightFunction& h, double eps) {
  const double u = std::sqrt(eps);
  std::vector<double> out;
  out.reserve(h.size());
  for (Height v : h.values()) out.push_back(u * static_cast<double>(v));
  return GridFunction(eps, h.lo(), std::move(out), h.has_even_anchor());
}

/// Inverse of A_eps on walk-tagged grid functions.
inline HeightFunction unscale_walk(const GridFunction& g) {
  if (!g.is_walk()) throw std::invalid_argument("unscale_walk: grid function is not a walk");
  const double u = std::sqrt(g.eps());
  std::vector<Height> v;
  v.reserve(g.size());
  for (double s : g.samples()) v.push_back(static_cast<Height>(std::llround(s / u)));
  return HeightFunction(g.lo(), std::move(v));
}

/// 2 eps^{1/2} floor(eps^{-3/2} (t - s) / 2): the drift correction of K^eps.
inline double k_epsilon_correction(double t_minus_s, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("k_epsilon_correction: scale must be positive");
  return 2.0 * std::sqrt(eps) * std::floor(t_minus_s / std::pow(eps, 1.5) / 2.0);
}

// ---------------------------------------------------------------------------
// Max-plus kernels and metric composition
// ---------------------------------------------------------------------------

/// Dense max-plus matrix K(x, y); rows index the first argument.
class Kernel {
 public:
  Kernel() = default;
  Kernel(std::size_t rows, std::size_t cols, double fill = kNegInf)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Kernel identity(std::size_t n) {
    Kernel k(n, n);
    for (std::size_t i = 0; i < n; ++i) k(i, i) = 0.0;
    return k;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// (f <> g)(x, y) = max_z f(x, z) + g(z, y).
inline Kernel diamond(const Kernel& f, const Kernel& g) {
  if (f.cols() == 0 || g.rows() == 0) throw std::invalid_argument("diamond: empty middle grid");
  if (f.cols() != g.rows()) throw std::invalid_argument("diamond: middle grids differ");
  Kernel out(f.rows(), g.cols());
  for (std::size_t x = 0; x < f.rows(); ++x)
    for (std::size_t z = 0; z < f.cols(); ++z) {
      const double a = f(x, z);
      if (is_neg_inf(a)) continue;
      for (std::size_t y = 0; y < g.cols(); ++y) out(x, y) = std::max(out(x, y), a + g(z, y));
    }
  return out;
}

/// (f <> g)(y) = max_z f(z) + g(z, y) for a one-variable f.
inline std::vector<double> diamond(std::span<const double> f, const Kernel& g) {
  if (f.empty() || g.rows() == 0) throw std::invalid_argument("diamond: empty middle grid");
  if (f.size() != g.rows()) throw std::invalid_argument("diamond: middle grids differ");
  std::vector<double> out(g.cols(), kNegInf);
  for (std::size_t z = 0; z < f.size(); ++z) {
    if (is_neg_inf(f[z])) continue;
    for (std::size_t y = 0; y < g.cols(); ++y) out[y] = std::max(out[y], f[z] + g(z, y));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV (index, value); -inf written literally
// ---------------------------------------------------------------------------

inline std::string format_value(double v) {
  if (is_neg_inf(v)) return "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void write_csv(std::ostream& os, const HeightFunction& h) {
  os << "index,value\n";
  for (Site x = h.lo(); x <= h.hi(); ++x) os << x << ',' << h(x) << '\n';
}

inline void write_csv(std::ostream& os, const GridFunction& g) {
  os << "index,value\n";
  for (Site i = g.lo(); i <= g.hi(); ++i) os << i << ',' << format_value(g(i)) << '\n';
}

/// Reads the (index, value) CSV written above; indices must be consecutive.
inline GridFunction read_grid_csv(std::istream& is, double eps, bool walk = false) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("index,value", 0) != 0)
    throw std::invalid_argument("read_grid_csv: missing header");
  Site lo = 0;
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("read_grid_csv: bad row");
    const Site idx = std::stoll(line.substr(0, comma));
    const std::string val = line.substr(comma + 1);
    if (values.empty()) lo = idx;
    else if (idx != lo + static_cast<Site>(values.size()))
      throw std::invalid_argument("read_grid_csv: indices not consecutive");
    values.push_back(val == "-inf" ? kNegInf : std::stod(val));
  }
  return GridFunction(eps, lo, std::move(values), walk);
}

// ---------------------------------------------------------------------------
// Walk measures: nu (simple random walk), bridge resampling, tilted walks
// ---------------------------------------------------------------------------

/// Walk on [lo, hi] pinned at h(0) = 0 with up-step probability up_prob.
inline HeightFunction sample_walk(CounterRng& rng, Site lo, Site hi, double up_prob = 0.5) {
  if (lo > 0 || hi < 0) throw std::invalid_argument("sample_walk: window must contain 0");
  std::vector<Height> v(static_cast<std::size_t>(hi - lo + 1));
  const auto zero = static_cast<std::size_t>(-lo);
  v[zero] = 0;
  for (std::size_t i = zero + 1; i < v.size(); ++i) v[i] = v[i - 1] + (rng.bernoulli(up_prob) ? 1 : -1);
  for (std::size_t i = zero; i-- > 0;) v[i] = v[i + 1] - (rng.bernoulli(up_prob) ? 1 : -1);
  return HeightFunction(lo, std::move(v));
}

/// Resamples h on [-half_width, 0] and [0, half_width] as independent uniform
/// bridges with the same endpoints; h is unchanged elsewhere.
inline HeightFunction resample_bridges(const HeightFunction& h, Site half_width, CounterRng& rng) {
  if (!h.contains(-half_width) || !h.contains(half_width))
    throw std::invalid_argument("resample_bridges: window too small");
  std::vector<Height> v(h.values().begin(), h.values().end());
  auto shuffle_segment = [&](Site a, Site b) {
    std::vector<int> steps;
    for (Site x = a; x < b; ++x) steps.push_back(static_cast<int>(h(x + 1) - h(x)));
    for (std::size_t i = steps.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng() % i);
      std::swap(steps[i - 1], steps[j]);
    }
    for (Site x = a; x < b; ++x)
      v[static_cast<std::size_t>(x + 1 - h.lo())] =
          v[static_cast<std::size_t>(x - h.lo())] + steps[static_cast<std::size_t>(x - a)];
  };
  shuffle_segment(-half_width, 0);
  shuffle_segment(0, half_width);
  return HeightFunction(h.lo(), std::move(v), h.boundary_policy());
}

/// Piecewise linear h: zero slope off [q_1, q_k], slope s_j on (q_j, q_{j+1}).
struct PiecewiseLinear {
  std::vector<double> breakpoints;  // q_1 < ... < q_k
  std::vector<double> slopes;       // k - 1 entries
  double offset = 0.0;              // h(0)

  double operator()(double x) const {
    // integral of h' from 0 to x
    auto integral_to = [&](double y) {
      double acc = 0.0;
      for (std::size_t j = 0; j + 1 < breakpoints.size(); ++j) {
        const double a = breakpoints[j], b = breakpoints[j + 1];
        const double lo = std::clamp(std::min(0.0, y), a, b);
        const double hi = std::clamp(std::max(0.0, y), a, b);
        acc += slopes[j] * (hi - lo) * (y >= 0.0 ? 1.0 : -1.0);
      }
      return acc;
    };
    return offset + integral_to(x);
  }
};

/// B[h]: forces up-steps (s_j >= 0) or down-steps (s_j < 0) of a scaled walk
/// with probability |s_j| eps^{1/2} / 2 on each piece, so B[h] - B -> h.
/// The walk is given unscaled (A_eps^{-1} B); the result is unscaled too.
inline HeightFunction tilted_walk(const HeightFunction& walk, const PiecewiseLinear& h, double eps,
                                  CounterRng& rng) {
  if (h.breakpoints.size() < 2 || h.slopes.size() + 1 != h.breakpoints.size())
    throw std::invalid_argument("tilted_walk: malformed piecewise linear function");
  const double u = std::sqrt(eps);
  std::vector<int> v;
  for (Site i = walk.lo() + 1; i <= walk.hi(); ++i) v.push_back(static_cast<int>(walk(i) - walk(i - 1)));
  for (Site i = walk.lo() + 1; i <= walk.hi(); ++i) {
    const double x = eps * static_cast<double>(i) / 2.0;
    const double unif = rng.uniform();
    for (std::size_t j = 0; j + 1 < h.breakpoints.size(); ++j) {
      if (!(x > h.breakpoints[j] && x <= h.breakpoints[j + 1])) continue;
      const double s = h.slopes[j];
      int& e = v[static_cast<std::size_t>(i - walk.lo() - 1)];
      const bool hit = unif <= std::abs(s) * u / 2.0;
      e = s >= 0.0 ? std::max(e, hit ? 1 : -1) : std::min(e, hit ? -1 : 1);
    }
  }
  // Rebuild with the value at 0 preserved, then apply the offset rounded to
  // the parity lattice 2 eps^{1/2} Z.
  std::vector<Height> out(walk.size());
  const Site zero = std::clamp<Site>(0, walk.lo(), walk.hi());
  const auto z = static_cast<std::size_t>(zero - walk.lo());
  const Height shift = 2 * static_cast<Height>(std::floor(h.offset / u / 2.0));
  out[z] = walk(zero) + shift;
  for (std::size_t i = z + 1; i < out.size(); ++i) out[i] = out[i - 1] + v[i - 1];
  for (std::size_t i = z; i-- > 0;) out[i] = out[i + 1] - v[i];
  return HeightFunction(walk.lo(), std::move(out), walk.boundary_policy());
}

}  // namespace kpzlab
