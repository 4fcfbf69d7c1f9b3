#pragma once

// Continuous-time exclusion dynamics of several height functions driven by
// one ClockField: nearest-neighbour ASEP under (a,b)-exotic couplings and
// finite-range AEP under the basic coupling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kpzlab/clock.hpp"
#include "kpzlab/lattice.hpp"

namespace kpzlab {

/// Jump rates p(v) of a finite-range exclusion process.
class JumpDistribution {
 public:
  // K defaults to the largest |v|; pass a larger bound when some rate exceeds it.
  explicit JumpDistribution(std::map<std::int64_t, double> rates, std::int64_t K = 0) : rates_(std::move(rates)) {
    std::int64_t g = 0;
    double mean = 0.0;
    for (auto it = rates_.begin(); it != rates_.end();) {
      const auto [v, p] = *it;
      if (v == 0) throw std::invalid_argument("JumpDistribution: jump vector 0");
      if (!(p >= 0.0)) throw std::invalid_argument("JumpDistribution: negative rate");
      if (p == 0.0) {
        it = rates_.erase(it);
        continue;
      }
      range_ = std::max(range_, std::abs(v));
      g = std::gcd(g, std::abs(v));
      mean += static_cast<double>(v) * p;
      ++it;
    }
    if (rates_.empty()) throw std::invalid_argument("JumpDistribution: empty support");
    if (K != 0 && K < range_) throw std::invalid_argument("JumpDistribution: K below the largest jump");
    range_ = std::max(range_, K);
    if (g != 1) throw std::invalid_argument("JumpDistribution: support does not generate Z");
    if (std::abs(mean - 1.0) > 1e-9)
      throw std::invalid_argument("JumpDistribution: mean jump " + std::to_string(mean) + " != 1");
    for (const auto& [v, p] : rates_)
      if (p > static_cast<double>(range_)) throw std::invalid_argument("JumpDistribution: p(v) > K");
  }

  static JumpDistribution tasep() { return JumpDistribution({{1, 1.0}}); }
  static JumpDistribution asep(double p) {
    return JumpDistribution({{1, p + 1.0}, {-1, p}}, static_cast<std::int64_t>(std::ceil(p + 1.0)));
  }

  std::int64_t range() const noexcept { return range_; }
  const std::map<std::int64_t, double>& rates() const noexcept { return rates_; }
  double rate(std::int64_t v) const {
    auto it = rates_.find(v);
    return it == rates_.end() ? 0.0 : it->second;
  }
  bool nearest_neighbour() const {
    return std::all_of(rates_.begin(), rates_.end(), [](const auto& e) { return std::abs(e.first) == 1; });
  }

 private:
  std::map<std::int64_t, double> rates_;
  std::int64_t range_ = 0;
};

struct ExoticCoupling {
  std::int64_t a = 1;
  std::int64_t b = 1;
};

enum class RateOrientation {
  Standard,  // local maxima flip down at rate p(1), local minima up at rate p(-1)
  Literal    // the two rates exchanged
};

/// A particle jump from `from` to `to` in one copy, applied by event `event`.
struct AppliedMove {
  std::uint64_t event = 0;
  double time = 0.0;
  std::uint32_t copy = 0;
  Site from = 0;
  Site to = 0;
};

/// Several height functions on a common window, sharing one ClockField.
/// Window boundary heights are frozen: no particle enters or leaves.
class CoupledEnsemble {
 public:
  CoupledEnsemble(std::vector<HeightFunction> copies, ClockField clock, double time = 0.0)
      : clock_(std::move(clock)), time_(time), initial_(std::move(copies)) {
    if (initial_.empty()) throw std::invalid_argument("CoupledEnsemble: no copies");
    lo_ = initial_.front().lo();
    for (const auto& h : initial_) {
      if (h.lo() != lo_ || h.hi() != initial_.front().hi())
        throw std::invalid_argument("CoupledEnsemble: copies must share a window");
      h_.emplace_back(h.values().begin(), h.values().end());
    }
  }

  std::size_t size() const noexcept { return h_.size(); }
  Site lo() const noexcept { return lo_; }
  Site hi() const noexcept { return lo_ + static_cast<Site>(h_.front().size()) - 1; }
  double time() const noexcept { return time_; }
  const ClockField& clock() const noexcept { return clock_; }
  const std::vector<HeightFunction>& initial() const noexcept { return initial_; }
  const std::vector<AppliedMove>& log() const noexcept { return log_; }
  std::uint64_t events_applied() const noexcept { return events_; }

  Height height(std::size_t c, Site x) const { return h_[c][static_cast<std::size_t>(x - lo_)]; }
  int occupied(std::size_t c, Site x) const { return height(c, x + 1) > height(c, x) ? 1 : 0; }
  std::span<const Height> heights(std::size_t c) const { return h_[c]; }

  HeightFunction copy(std::size_t c) const {
    return HeightFunction(lo_, h_.at(c), initial_[c].boundary_policy());
  }

  void set_logging(bool on) noexcept { logging_ = on; }
  void set_time(double t) noexcept { time_ = t; }

  /// Starts a new event; moves applied until the next call share its id.
  std::uint64_t begin_event() noexcept { return ++events_; }

  void apply_move(std::size_t c, Site from, Site to, double time) {
    if (c >= h_.size()) throw std::out_of_range("apply_move: copy index");
    if (from == to || from < lo() || to < lo() || from >= hi() || to >= hi())
      throw std::invalid_argument("apply_move: move leaves the window");
    if (!occupied(c, from) || occupied(c, to))
      throw std::invalid_argument("apply_move: exclusion rule violated at " + std::to_string(from) + "->" +
                                  std::to_string(to));
    auto& h = h_[c];
    if (to > from) {
      for (Site y = from + 1; y <= to; ++y) h[static_cast<std::size_t>(y - lo_)] -= 2;
    } else {
      for (Site y = to + 1; y <= from; ++y) h[static_cast<std::size_t>(y - lo_)] += 2;
    }
    if (logging_) log_.push_back({events_, time, static_cast<std::uint32_t>(c), from, to});
  }

 private:
  ClockField clock_;
  double time_ = 0.0;
  Site lo_ = 0;
  std::vector<HeightFunction> initial_;
  std::vector<std::vector<Height>> h_;
  std::vector<AppliedMove> log_;
  std::uint64_t events_ = 0;
  bool logging_ = true;
};

namespace detail {

// Time-ordered merge of the streams of currently active keys. Keys are
// reference counted; a key that becomes active at time tau enters with its
// first event after tau, and stale heap entries are dropped on pop. Since an
// event of an inactive key is a no-op in every copy, this replays the full
// merge exactly.
class LazyScheduler {
 public:
  template <class RateFn>
  explicit LazyScheduler(const ClockField& clock, RateFn rate) : clock_(clock), rate_(std::move(rate)) {}

  void adjust(const StreamKey& k, int delta) {
    auto& st = keys_[k];
    if (!st.touched) {
      st.touched = true;
      st.was_active = st.count > 0;
      touched_.push_back(k);
    }
    st.count += delta;
    if (st.count < 0) throw std::logic_error("LazyScheduler: negative reference count");
  }

  // Closes a batch of adjustments made at time tau. `fired` is the key whose
  // event was just applied (still valid entries are re-armed after tau).
  void commit(double tau, const StreamKey* fired) {
    for (const auto& k : touched_) {
      auto& st = keys_[k];
      st.touched = false;
      if (!st.was_active && st.count > 0) {
        ++st.gen;
        push(k, st.gen, tau);
      }
    }
    touched_.clear();
    if (fired) {
      auto& st = keys_[*fired];
      if (st.count > 0 && st.armed_gen == st.gen) push(*fired, st.gen, tau);
    }
  }

  // Next valid event with time <= until.
  std::optional<std::pair<double, StreamKey>> pop(double until) {
    while (!heap_.empty()) {
      const Entry e = heap_.top();
      if (e.time > until) return std::nullopt;
      heap_.pop();
      auto& st = keys_[e.key];
      if (st.count <= 0 || st.gen != e.gen) continue;
      st.armed_gen = e.gen;
      return std::make_pair(e.time, e.key);
    }
    return std::nullopt;
  }

 private:
  struct KeyState {
    int count = 0;
    std::uint64_t gen = 0;
    std::uint64_t armed_gen = 0;
    bool touched = false;
    bool was_active = false;
  };
  struct Entry {
    double time;
    StreamKey key;
    std::uint64_t gen;
    bool operator>(const Entry& o) const {
      if (time != o.time) return time > o.time;
      return o.key < key;
    }
  };

  void push(const StreamKey& k, std::uint64_t gen, double tau) {
    const double t = next_event_after(clock_.stream(k, rate_(k)), tau);
    if (std::isfinite(t)) heap_.push({t, k, gen});
  }

  const ClockField& clock_;
  std::function<double(const StreamKey&)> rate_;
  std::unordered_map<StreamKey, KeyState, StreamKeyHash> keys_;
  std::vector<StreamKey> touched_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
};

}  // namespace detail

/// Nearest-neighbour exclusion under the (a,b)-exotic coupling. Clocks are
/// indexed by the class of the (particle label, hole label) pair, where the
/// particle at x carries label -(h(x)+x)/2 and the hole at x carries (x-h(x))/2.
class ExoticEngine {
 public:
  ExoticEngine(CoupledEnsemble& ens, ExoticCoupling c, double p_right, double p_left,
               RateOrientation orientation = RateOrientation::Standard)
      : ens_(ens), c_(c), sched_(ens.clock(), [this](const StreamKey& k) { return rate_of(k); }) {
    if (c.a < 0 || c.b < 0 || (c.a == 0 && c.b == 0))
      throw std::invalid_argument("ExoticEngine: (a,b) must be non-negative and not both zero");
    if (p_right < 0.0 || p_left < 0.0) throw std::invalid_argument("ExoticEngine: negative rate");
    const bool literal = orientation == RateOrientation::Literal;
    rate_plus_ = literal ? p_left : p_right;
    rate_minus_ = literal ? p_right : p_left;
    for (std::size_t i = 0; i < ens.size(); ++i) ens.copy(i).require_even_anchor();
    const std::size_t nb = bond_count();
    bonds_.assign(ens.size(), std::vector<std::optional<StreamKey>>(nb));
    members_.resize(ens.size());
    for (std::size_t cp = 0; cp < ens.size(); ++cp)
      for (std::size_t b = 0; b < nb; ++b) refresh(cp, ens.lo() + static_cast<Site>(b));
    sched_.commit(ens.time(), nullptr);
  }

  void advance(double until) {
    while (auto ev = sched_.pop(until)) {
      const auto [tau, key] = *ev;
      ens_.begin_event();
      for (std::size_t cp = 0; cp < ens_.size(); ++cp) {
        auto it = members_[cp].find(key);
        if (it == members_[cp].end() || it->second.empty()) continue;
        const std::vector<Site> sites = it->second;
        for (Site x : sites) {
          if (key.dir > 0) ens_.apply_move(cp, x, x + 1, tau);
          else ens_.apply_move(cp, x + 1, x, tau);
          for (Site y = x - 1; y <= x + 1; ++y) refresh(cp, y);
        }
      }
      sched_.commit(tau, &key);
    }
    ens_.set_time(std::max(ens_.time(), until));
  }

 private:
  std::size_t bond_count() const {
    const Site n = ens_.hi() - ens_.lo() - 1;  // bonds x with x, x+1 in [lo, hi-1]
    return n > 0 ? static_cast<std::size_t>(n) : 0;
  }

  double rate_of(const StreamKey& k) const { return k.dir > 0 ? rate_plus_ : rate_minus_; }

  std::optional<StreamKey> classify(std::size_t cp, Site x) const {
    const int e0 = ens_.occupied(cp, x);
    const int e1 = ens_.occupied(cp, x + 1);
    if (e0 == e1) return std::nullopt;
    const Height h0 = ens_.height(cp, x);
    const Height h1 = ens_.height(cp, x + 1);
    std::int64_t ell = 0, k = 0;
    std::int32_t dir = 0;
    if (e0 == 1) {  // particle at x, hole at x+1
      ell = -(h0 + x) / 2;
      k = (x + 1 - h1) / 2;
      dir = +1;
      if (rate_plus_ == 0.0) return std::nullopt;
    } else {  // hole at x, particle at x+1
      k = (x - h0) / 2;
      ell = -(h1 + x + 1) / 2;
      dir = -1;
      if (rate_minus_ == 0.0) return std::nullopt;
    }
    return quotient_key(ell, k, c_.a, c_.b).stream_key(dir);
  }

  void refresh(std::size_t cp, Site x) {
    if (x < ens_.lo() || x + 1 > ens_.hi() - 1) return;
    auto& slot = bonds_[cp][static_cast<std::size_t>(x - ens_.lo())];
    const auto now = classify(cp, x);
    if (slot == now) return;
    if (slot) {
      auto& v = members_[cp][*slot];
      v.erase(std::find(v.begin(), v.end(), x));
      sched_.adjust(*slot, -1);
    }
    if (now) {
      members_[cp][*now].push_back(x);
      sched_.adjust(*now, +1);
    }
    slot = now;
  }

  CoupledEnsemble& ens_;
  ExoticCoupling c_;
  double rate_plus_ = 0.0;
  double rate_minus_ = 0.0;
  detail::LazyScheduler sched_;
  std::vector<std::vector<std::optional<StreamKey>>> bonds_;
  std::vector<std::unordered_map<StreamKey, std::vector<Site>, StreamKeyHash>> members_;
};

/// Finite-range AEP under the basic coupling: stream (x, v) attempts to move
/// the particle at x to x+v in every copy.
class BasicEngine {
 public:
  BasicEngine(CoupledEnsemble& ens, JumpDistribution p)
      : ens_(ens), p_(std::move(p)),
        sched_(ens.clock(), [this](const StreamKey& k) { return p_.rate(k.j); }) {
    for (std::size_t cp = 0; cp < ens.size(); ++cp)
      for (Site x = ens.lo(); x < ens.hi(); ++x)
        for (const auto& [v, r] : p_.rates())
          if (active(cp, x, v)) sched_.adjust(basic_key(x, v), +1);
    sched_.commit(ens.time(), nullptr);
  }

  void advance(double until) {
    std::vector<std::pair<Site, std::int64_t>> affected;
    while (auto ev = sched_.pop(until)) {
      const auto [tau, key] = *ev;
      const Site x = key.i;
      const std::int64_t v = key.j;
      ens_.begin_event();
      for (std::size_t cp = 0; cp < ens_.size(); ++cp) {
        if (!active(cp, x, v)) continue;
        collect_affected(x, x + v, affected);
        std::vector<char> before(affected.size());
        for (std::size_t i = 0; i < affected.size(); ++i)
          before[i] = active(cp, affected[i].first, affected[i].second);
        ens_.apply_move(cp, x, x + v, tau);
        for (std::size_t i = 0; i < affected.size(); ++i) {
          const bool after = active(cp, affected[i].first, affected[i].second);
          if (after != static_cast<bool>(before[i]))
            sched_.adjust(basic_key(affected[i].first, affected[i].second), after ? +1 : -1);
        }
      }
      sched_.commit(tau, &key);
    }
    ens_.set_time(std::max(ens_.time(), until));
  }

 private:
  bool in_sites(Site x) const { return x >= ens_.lo() && x < ens_.hi(); }

  bool active(std::size_t cp, Site x, std::int64_t v) const {
    return in_sites(x) && in_sites(x + v) && ens_.occupied(cp, x) && !ens_.occupied(cp, x + v);
  }

  void collect_affected(Site x, Site y, std::vector<std::pair<Site, std::int64_t>>& out) const {
    out.clear();
    for (const auto& [w, r] : p_.rates()) {
      for (Site z : {x, y}) {
        out.emplace_back(z, w);
        out.emplace_back(z - w, w);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

  CoupledEnsemble& ens_;
  JumpDistribution p_;
  detail::LazyScheduler sched_;
};

inline CoupledEnsemble evolve_asep_exotic(CoupledEnsemble ens, ExoticCoupling c, double p_right, double p_left,
                                          double until,
                                          RateOrientation orientation = RateOrientation::Standard) {
  ExoticEngine engine(ens, c, p_right, p_left, orientation);
  engine.advance(until);
  return ens;
}

inline CoupledEnsemble evolve_asep_exotic(CoupledEnsemble ens, ExoticCoupling c, const JumpDistribution& p,
                                          double until,
                                          RateOrientation orientation = RateOrientation::Standard) {
  if (!p.nearest_neighbour()) throw std::invalid_argument("use evolve_aep_basic");
  return evolve_asep_exotic(std::move(ens), c, p.rate(1), p.rate(-1), until, orientation);
}

inline CoupledEnsemble evolve_aep_basic(CoupledEnsemble ens, const JumpDistribution& p, double until) {
  BasicEngine engine(ens, p);
  engine.advance(until);
  return ens;
}

// ---------------------------------------------------------------------------
// Certified region, monotonicity and shift equivariance
// ---------------------------------------------------------------------------

struct CertifiedRegion {
  Site lo = 0;
  Site hi = -1;
  bool empty() const noexcept { return lo > hi; }
  bool contains(Site x) const noexcept { return x >= lo && x <= hi; }
};

inline CertifiedRegion certified_region(Site window_lo, Site window_hi, std::int64_t K, double t) {
  if (t < 0.0) throw std::invalid_argument("certified_region: negative time");
  const auto margin = static_cast<Site>(std::ceil(4.0 * static_cast<double>(K * K) * t - 1e-12));
  CertifiedRegion r{window_lo + margin, window_hi - margin};
  if (r.lo > r.hi) r = CertifiedRegion{};
  return r;
}

struct MonotoneViolation {
  double time = 0.0;
  Site site = 0;
  std::size_t lower = 0;  // copy that should stay below
  std::size_t upper = 0;
};

struct MonotoneReport {
  bool ok = true;
  std::optional<MonotoneViolation> violation;
  std::size_t events_checked = 0;
};

/// Replays the move log and checks that every initial pointwise ordering
/// between copies survives each event, on `region` (default: whole window).
inline MonotoneReport check_monotone(const CoupledEnsemble& ens,
                                     std::optional<CertifiedRegion> region = std::nullopt) {
  const auto& init = ens.initial();
  const std::size_t n = init.size();
  const Site lo = ens.lo();
  const Site rlo = region ? std::max(region->lo, lo) : lo;
  const Site rhi = region ? std::min(region->hi, ens.hi()) : ens.hi();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && init[i].dominated_by(init[j])) pairs.emplace_back(i, j);

  std::vector<std::vector<Height>> h;
  for (const auto& f : init) h.emplace_back(f.values().begin(), f.values().end());
  MonotoneReport rep;
  const auto& log = ens.log();
  std::size_t k = 0;
  std::vector<Site> changed;
  while (k < log.size()) {
    const std::uint64_t ev = log[k].event;
    const double tau = log[k].time;
    changed.clear();
    for (; k < log.size() && log[k].event == ev; ++k) {
      const auto& m = log[k];
      auto& hc = h[m.copy];
      const Site a = std::min(m.from, m.to) + 1, b = std::max(m.from, m.to);
      for (Site y = a; y <= b; ++y) {
        hc[static_cast<std::size_t>(y - lo)] += m.to > m.from ? -2 : 2;
        changed.push_back(y);
      }
    }
    ++rep.events_checked;
    for (Site y : changed) {
      if (y < rlo || y > rhi) continue;
      for (auto [i, j] : pairs) {
        if (h[i][static_cast<std::size_t>(y - lo)] > h[j][static_cast<std::size_t>(y - lo)]) {
          rep.ok = false;
          rep.violation = MonotoneViolation{tau, y, i, j};
          return rep;
        }
      }
    }
  }
  return rep;
}

/// m is admissible when the height shift m(a+b) is even.
inline bool shift_admissible(ExoticCoupling c, std::int64_t m) { return is_even(m * (c.a + c.b)); }

/// Evolves h and x -> h(x - m(a-b)) + m(a+b) (on the correspondingly shifted
/// window) under the same clocks and compares them exactly.
inline bool shift_equivariance_check(ExoticCoupling c, std::int64_t m, const ClockField& clock,
                                     const HeightFunction& h0, double horizon, double p_right = 1.5,
                                     double p_left = 0.5) {
  if (!shift_admissible(c, m)) throw std::invalid_argument("shift_equivariance_check: parity-inadmissible m");
  const Site ds = m * (c.a - c.b);
  const Height dh = m * (c.a + c.b);
  CoupledEnsemble e1({h0}, clock);
  CoupledEnsemble e2({shift_map(h0, ds, dh)}, clock);
  e1.set_logging(false);
  e2.set_logging(false);
  ExoticEngine(e1, c, p_right, p_left).advance(horizon);
  ExoticEngine(e2, c, p_right, p_left).advance(horizon);
  return shift_map(e1.copy(0), ds, dh) == e2.copy(0);
}

/// Seeded form: a random walk on a 65-site window is evolved to `horizon`.
inline bool shift_equivariance_check(ExoticCoupling c, std::int64_t m, std::uint64_t seed, double horizon) {
  if (!shift_admissible(c, m)) throw std::invalid_argument("shift_equivariance_check: parity-inadmissible m");
  ClockField clock(seed, horizon);
  CounterRng rng = clock.substream({StreamFamily::Aux, 0, 0, 1});
  return shift_equivariance_check(c, m, clock, sample_walk(rng, -32, 32), horizon);
}

}  // namespace kpzlab
