#pragma once

// The four-type process encoding a basic-coupled pair (h-, h+): holes,
// particles, type-2 (only h+ occupied) and type-3 (only h- occupied)
// particles, with ordered labels on the discrepancies and takeover counting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kpzlab/clock.hpp"
#include "kpzlab/exclusion.hpp"
#include "kpzlab/lattice.hpp"

namespace kpzlab {

enum Cell : std::uint8_t { kHole = 0, kParticle = 1, kType2 = 2, kType3 = 3 };

struct LabelSlot {
  Site site = 0;
  double label = 0.0;
  std::uint32_t id = 0;  // stable identity used by the takeover ledger
  friend bool operator==(const LabelSlot&, const LabelSlot&) = default;
};

/// gamma on particle sites [lo, hi]; labels sorted by site (and by label).
struct MultiTypeConfig {
  Site lo = 0;
  std::vector<std::uint8_t> types;
  Height anchor_minus = 0;  // h-(lo)
  Height anchor_plus = 0;   // h+(lo)
  std::vector<LabelSlot> labels2;
  std::vector<LabelSlot> labels3;

  Site hi() const noexcept { return lo + static_cast<Site>(types.size()) - 1; }
  bool contains(Site x) const noexcept { return x >= lo && x <= hi(); }
  std::uint8_t at(Site x) const { return types.at(static_cast<std::size_t>(x - lo)); }

  HeightFunction h_minus() const { return decode(anchor_minus, true); }
  HeightFunction h_plus() const { return decode(anchor_plus, false); }

  /// Label order, disjointness and agreement of label sites with gamma.
  void validate() const {
    auto check = [&](const std::vector<LabelSlot>& ls, std::uint8_t type) {
      std::size_t k = 0;
      for (Site x = lo; x <= hi(); ++x) {
        if (at(x) != type) continue;
        if (k >= ls.size() || ls[k].site != x) throw std::logic_error("MultiTypeConfig: label sites out of sync");
        if (k > 0 && !(ls[k].label > ls[k - 1].label))
          throw std::logic_error("MultiTypeConfig: labels not increasing");
        ++k;
      }
      if (k != ls.size()) throw std::logic_error("MultiTypeConfig: stray labels");
    };
    check(labels2, kType2);
    check(labels3, kType3);
  }

  friend bool operator==(const MultiTypeConfig&, const MultiTypeConfig&) = default;

 private:
  HeightFunction decode(Height anchor, bool minus) const {
    std::vector<Height> h{anchor};
    for (auto t : types) {
      const bool occ = t == kParticle || (minus ? t == kType3 : t == kType2);
      h.push_back(h.back() + (occ ? 1 : -1));
    }
    return HeightFunction(lo, std::move(h));
  }
};

/// gamma(x) from (eta-(x), eta+(x)); labels are the site indices.
inline MultiTypeConfig encode_pair(const HeightFunction& h_minus, const HeightFunction& h_plus) {
  if (h_minus.lo() != h_plus.lo() || h_minus.hi() != h_plus.hi())
    throw std::invalid_argument("encode_pair: windows differ");
  MultiTypeConfig cfg;
  cfg.lo = h_minus.lo();
  cfg.anchor_minus = h_minus(cfg.lo);
  cfg.anchor_plus = h_plus(cfg.lo);
  for (Site x = h_minus.lo(); x < h_minus.hi(); ++x) {
    const bool em = h_minus(x + 1) > h_minus(x);
    const bool ep = h_plus(x + 1) > h_plus(x);
    std::uint8_t t = em ? (ep ? kParticle : kType3) : (ep ? kType2 : kHole);
    cfg.types.push_back(t);
    if (t == kType2) cfg.labels2.push_back({x, static_cast<double>(x), static_cast<std::uint32_t>(cfg.labels2.size())});
    if (t == kType3) cfg.labels3.push_back({x, static_cast<double>(x), static_cast<std::uint32_t>(cfg.labels3.size())});
  }
  return cfg;
}

enum class MoveKind { None, Jump, Swap, Annihilation };

/// What the basic-coupled event (x, v) does to gamma.
inline MoveKind classify_move(const MultiTypeConfig& cfg, Site x, std::int64_t v, std::string* reason = nullptr) {
  auto fail = [&](const char* why) {
    if (reason) *reason = why;
    return MoveKind::None;
  };
  if (v == 0) return fail("zero jump");
  if (!cfg.contains(x) || !cfg.contains(x + v)) return fail("move leaves the window");
  const auto a = cfg.at(x), b = cfg.at(x + v);
  if (a == kHole) return fail("no particle at the source");
  if (b == kHole) return MoveKind::Jump;
  if (a == kParticle) return b == kParticle ? fail("target occupied in both copies") : MoveKind::Swap;
  if ((a == kType2 && b == kType3) || (a == kType3 && b == kType2)) return MoveKind::Annihilation;
  return fail("target blocks the mover");
}

struct RemovalRecord {
  double time = 0.0;
  double label2 = 0.0;
  double label3 = 0.0;
  std::uint32_t id2 = 0;
  std::uint32_t id3 = 0;
  Site site = 0;  // origin of the annihilating jump
};

/// Takeover counts per label id, plus annihilation records.
struct TakeoverLedger {
  std::vector<std::uint32_t> counts2;
  std::vector<std::uint32_t> counts3;
  std::vector<RemovalRecord> removals;
};

/// Uniforms on (0,1) selecting the removed labels at an annihilation.
struct AnnihilationChoice {
  double u2 = 0.5;
  double u3 = 0.5;
};

/// Configuration plus the per-pair crossing flags the takeover rule needs.
class MultiTypeState {
 public:
  MultiTypeState() = default;
  explicit MultiTypeState(MultiTypeConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    n2_ = cfg_.labels2.empty() ? 0 : 1 + std::max_element(cfg_.labels2.begin(), cfg_.labels2.end(),
                                                           [](auto& a, auto& b) { return a.id < b.id; })->id;
    n3_ = cfg_.labels3.empty() ? 0 : 1 + std::max_element(cfg_.labels3.begin(), cfg_.labels3.end(),
                                                           [](auto& a, auto& b) { return a.id < b.id; })->id;
    pos2_.assign(n2_, kDead);
    pos3_.assign(n3_, kDead);
    for (const auto& s : cfg_.labels2) pos2_[s.id] = s.site;
    for (const auto& s : cfg_.labels3) pos3_[s.id] = s.site;
    ledger_.counts2.assign(n2_, 0);
    ledger_.counts3.assign(n3_, 0);
    left_.assign(n2_ * n3_, 0);
    for (std::uint32_t x = 0; x < n2_; ++x)
      for (std::uint32_t z = 0; z < n3_; ++z)
        left_[x * n3_ + z] = (pos2_[x] != kDead && pos3_[z] != kDead && pos3_[z] < pos2_[x]) ? 1 : 0;
  }

  const MultiTypeConfig& config() const noexcept { return cfg_; }
  const TakeoverLedger& ledger() const noexcept { return ledger_; }
  bool alive2(std::uint32_t id) const { return pos2_.at(id) != kDead; }
  bool alive3(std::uint32_t id) const { return pos3_.at(id) != kDead; }
  Site position2(std::uint32_t id) const { return pos2_.at(id); }
  Site position3(std::uint32_t id) const { return pos3_.at(id); }
  /// Whether type-3 label z has ever been left of type-2 label x.
  bool has_been_left(std::uint32_t x, std::uint32_t z) const { return left_.at(x * n3_ + z) != 0; }

  /// Applies the move of the particle at x by v. Throws on an illegal move.
  MoveKind apply(Site x, std::int64_t v, std::int64_t K, AnnihilationChoice choice = {}, double time = 0.0) {
    std::string why;
    const MoveKind kind = classify_move(cfg_, x, v, &why);
    if (kind == MoveKind::None) throw std::invalid_argument("step_multitype: illegal move (" + why + ")");
    const Site y = x + v;
    auto& ty = cfg_.types;
    const auto ix = static_cast<std::size_t>(x - cfg_.lo), iy = static_cast<std::size_t>(y - cfg_.lo);
    const std::uint8_t a = ty[ix], b = ty[iy];

    if (kind == MoveKind::Annihilation) {
      auto in_window = [&](const std::vector<LabelSlot>& ls) {
        auto first = std::lower_bound(ls.begin(), ls.end(), x - K, [](const LabelSlot& s, Site p) { return s.site < p; });
        auto last = std::upper_bound(ls.begin(), ls.end(), x + K, [](Site p, const LabelSlot& s) { return p < s.site; });
        return std::make_pair(static_cast<std::size_t>(first - ls.begin()), static_cast<std::size_t>(last - first));
      };
      const auto [f2, c2] = in_window(cfg_.labels2);
      const auto [f3, c3] = in_window(cfg_.labels3);
      if (c2 == 0 || c3 == 0) throw std::logic_error("annihilation without labels in range");
      const std::size_t r2 = f2 + std::min(c2 - 1, static_cast<std::size_t>(choice.u2 * static_cast<double>(c2)));
      const std::size_t r3 = f3 + std::min(c3 - 1, static_cast<std::size_t>(choice.u3 * static_cast<double>(c3)));
      const LabelSlot gone2 = cfg_.labels2[r2], gone3 = cfg_.labels3[r3];
      virtual_takeovers(gone2, gone3);
      ledger_.removals.push_back({time, gone2.label, gone3.label, gone2.id, gone3.id, x});
      pos2_[gone2.id] = kDead;
      pos3_[gone3.id] = kDead;
      // One type-2 and one type-3 site disappear; the surviving labels are
      // handed to the surviving sites in order.
      auto drop = [](std::vector<LabelSlot>& ls, std::size_t r, Site site) {
        std::vector<Site> sites;
        for (const auto& s : ls)
          if (s.site != site) sites.push_back(s.site);
        ls.erase(ls.begin() + static_cast<std::ptrdiff_t>(r));
        for (std::size_t i = 0; i < ls.size(); ++i) ls[i].site = sites[i];
      };
      drop(cfg_.labels2, r2, a == kType2 ? x : y);
      drop(cfg_.labels3, r3, a == kType3 ? x : y);
      ty[ix] = kHole;
      ty[iy] = kParticle;
    } else if (kind == MoveKind::Jump) {
      std::swap(ty[ix], ty[iy]);
      if (a == kType2) resite(cfg_.labels2, x, y);
      if (a == kType3) resite(cfg_.labels3, x, y);
    } else {  // particle at x swaps with the discrepancy at y
      ty[ix] = b;
      ty[iy] = kParticle;
      if (b == kType2) resite(cfg_.labels2, y, x);
      if (b == kType3) resite(cfg_.labels3, y, x);
    }
    detect_crossings();
    return kind;
  }

 private:
  static constexpr Site kDead = std::numeric_limits<Site>::min();

  // Removes site `from` from the label sites (if given), adds `to`, then
  // hands the labels, still in increasing order, to the sites left to right.
  static void resite(std::vector<LabelSlot>& ls, std::optional<Site> from, std::optional<Site> to) {
    std::vector<Site> sites;
    sites.reserve(ls.size() + 1);
    for (const auto& s : ls) sites.push_back(s.site);
    if (from) {
      auto it = std::find(sites.begin(), sites.end(), *from);
      if (it != sites.end()) sites.erase(it);
    }
    if (to) sites.insert(std::upper_bound(sites.begin(), sites.end(), *to), *to);
    if (sites.size() != ls.size()) throw std::logic_error("resite: label count mismatch");
    for (std::size_t i = 0; i < ls.size(); ++i) ls[i].site = sites[i];
  }

  void virtual_takeovers(const LabelSlot& gone2, const LabelSlot& gone3) {
    for (const auto& X : cfg_.labels2) {
      if (X.id == gone2.id) continue;
      if (gone2.site < X.site && gone3.site > X.site && !left_[X.id * n3_ + gone3.id]) ++ledger_.counts2[X.id];
    }
    for (const auto& Z : cfg_.labels3) {
      if (Z.id == gone3.id) continue;
      if (gone3.site > Z.site && gone2.site < Z.site && !left_[gone2.id * n3_ + Z.id]) ++ledger_.counts3[Z.id];
    }
  }

  void detect_crossings() {
    std::vector<std::uint32_t> moved2, moved3;
    for (const auto& s : cfg_.labels2)
      if (pos2_[s.id] != s.site) {
        pos2_[s.id] = s.site;
        moved2.push_back(s.id);
      }
    for (const auto& s : cfg_.labels3)
      if (pos3_[s.id] != s.site) {
        pos3_[s.id] = s.site;
        moved3.push_back(s.id);
      }
    auto visit = [&](std::uint32_t x, std::uint32_t z) {
      auto& f = left_[x * n3_ + z];
      if (!f && pos3_[z] < pos2_[x]) {
        f = 1;
        ++ledger_.counts2[x];
        ++ledger_.counts3[z];
      }
    };
    for (auto x : moved2)
      for (const auto& Z : cfg_.labels3) visit(x, Z.id);
    for (auto z : moved3)
      for (const auto& X : cfg_.labels2) visit(X.id, z);
  }

  MultiTypeConfig cfg_;
  TakeoverLedger ledger_;
  std::uint32_t n2_ = 0, n3_ = 0;
  std::vector<Site> pos2_, pos3_;
  std::vector<std::uint8_t> left_;
};

inline MultiTypeState step_multitype(MultiTypeState state, Site x, std::int64_t v, std::int64_t K,
                                     AnnihilationChoice choice = {}, double time = 0.0) {
  state.apply(x, v, K, choice, time);
  return state;
}

/// Continuous-time evolution of gamma under the basic-coupled clocks (x, v).
/// Annihilation choices read the ClockField substream keyed by the
/// annihilation count.
class MultiTypeProcess {
 public:
  MultiTypeProcess(MultiTypeConfig cfg, ClockField clock, JumpDistribution p, double time = 0.0)
      : state_(std::move(cfg)), clock_(std::move(clock)), p_(std::move(p)), time_(time),
        sched_(clock_, [this](const StreamKey& k) { return p_.rate(k.j); }) {
    const auto& c = state_.config();
    for (Site x = c.lo; x <= c.hi(); ++x)
      for (const auto& [v, r] : p_.rates())
        if (active(x, v)) sched_.adjust(basic_key(x, v), +1);
    sched_.commit(time_, nullptr);
  }

  MultiTypeProcess(const MultiTypeProcess&) = delete;
  MultiTypeProcess& operator=(const MultiTypeProcess&) = delete;

  const MultiTypeState& state() const noexcept { return state_; }
  double time() const noexcept { return time_; }
  std::uint64_t annihilations() const noexcept { return annihilations_; }

  template <class OnMove>
  void advance(double until, OnMove&& on_move) {
    std::vector<std::pair<Site, std::int64_t>> affected;
    while (auto ev = sched_.pop(until)) {
      const auto [tau, key] = *ev;
      const Site x = key.i;
      const std::int64_t v = key.j;
      if (!active(x, v)) {
        sched_.commit(tau, &key);
        continue;
      }
      collect(x, x + v, affected);
      std::vector<char> before(affected.size());
      for (std::size_t i = 0; i < affected.size(); ++i) before[i] = active(affected[i].first, affected[i].second);
      AnnihilationChoice choice;
      if (classify_move(state_.config(), x, v) == MoveKind::Annihilation) {
        CounterRng rng = clock_.substream({StreamFamily::Aux, static_cast<std::int64_t>(annihilations_), 0, 7});
        choice = {rng.uniform(), rng.uniform()};
        ++annihilations_;
      }
      const MoveKind kind = state_.apply(x, v, p_.range(), choice, tau);
      for (std::size_t i = 0; i < affected.size(); ++i) {
        const bool after = active(affected[i].first, affected[i].second);
        if (after != static_cast<bool>(before[i]))
          sched_.adjust(basic_key(affected[i].first, affected[i].second), after ? +1 : -1);
      }
      sched_.commit(tau, &key);
      on_move(tau, x, v, kind);
    }
    time_ = std::max(time_, until);
  }

  void advance(double until) {
    advance(until, [](double, Site, std::int64_t, MoveKind) {});
  }

 private:
  bool active(Site x, std::int64_t v) const { return classify_move(state_.config(), x, v) != MoveKind::None; }

  void collect(Site x, Site y, std::vector<std::pair<Site, std::int64_t>>& out) const {
    out.clear();
    for (const auto& [w, r] : p_.rates())
      for (Site z : {x, y}) {
        out.emplace_back(z, w);
        out.emplace_back(z - w, w);
      }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

  MultiTypeState state_;
  ClockField clock_;
  JumpDistribution p_;
  double time_ = 0.0;
  std::uint64_t annihilations_ = 0;
  detail::LazyScheduler sched_;
};

/// Y = max over [-w, w] of h-(x) - h+(x), on a certified region at time t.
inline std::int64_t y_statistic(const MultiTypeConfig& cfg, double t, Site w, std::int64_t K) {
  const auto hm = cfg.h_minus();
  const auto hp = cfg.h_plus();
  const auto cert = certified_region(hm.lo(), hm.hi(), K, t);
  if (cert.empty() || !cert.contains(-w) || !cert.contains(w))
    throw std::invalid_argument("y_statistic: region not certified");
  std::int64_t y = std::numeric_limits<std::int64_t>::min();
  for (Site x = -w; x <= w; ++x) y = std::max(y, hm(x) - hp(x));
  return y;
}

/// Ordered random pair h- = min(h+, h') with h+, h' independent walks.
inline std::pair<HeightFunction, HeightFunction> random_ordered_pair(CounterRng& rng, Site lo, Site hi) {
  const HeightFunction hp = sample_walk(rng, lo, hi);
  const HeightFunction other = sample_walk(rng, lo, hi);
  std::vector<Height> hm;
  for (Site x = lo; x <= hi; ++x) hm.push_back(std::min(hp(x), other(x)));
  return {HeightFunction(lo, std::move(hm)), hp};
}

struct TailCurve {
  std::vector<double> survival;  // survival[m] = P[count >= m]
  std::size_t samples = 0;
};

inline TailCurve survival_curve(const std::vector<std::uint32_t>& counts) {
  TailCurve c;
  c.samples = counts.size();
  if (counts.empty()) return c;
  const auto mx = *std::max_element(counts.begin(), counts.end());
  std::vector<std::size_t> hist(mx + 2, 0);
  for (auto k : counts) ++hist[k];
  c.survival.assign(mx + 1, 0.0);
  std::size_t above = counts.size();
  for (std::uint32_t m = 0; m <= mx; ++m) {
    c.survival[m] = static_cast<double>(above) / static_cast<double>(counts.size());
    above -= hist[m];
  }
  return c;
}

struct MultitypeRunParams {
  Site box = 20;         // labels counted if alive at time 0 in [-box, box]
  double horizon = 4.0;
  Site margin = 8;       // extra sites beyond the light cone
};

inline Site multitype_half_width(const JumpDistribution& p, const MultitypeRunParams& rp, Site w = 0) {
  const double K = static_cast<double>(p.range());
  return std::max(rp.box, w) + static_cast<Site>(std::ceil(4.0 * K * K * rp.horizon)) + rp.margin;
}

/// Takeover counts of labels alive at time 0 in [-box, box] for one replica.
inline std::vector<std::uint32_t> takeover_counts(const JumpDistribution& p, const MultitypeRunParams& rp,
                                                  std::uint64_t seed) {
  if (!(p.rate(1) > 0.5)) throw std::invalid_argument("takeover_tail: requires p(1) > 1/2");
  const Site W = multitype_half_width(p, rp);
  ClockField clock(seed, rp.horizon);
  CounterRng rng = clock.substream({StreamFamily::Aux, 0, 0, 3});
  auto [hm, hp] = random_ordered_pair(rng, -W, W);
  MultiTypeConfig cfg = encode_pair(hm, hp);
  std::vector<std::uint32_t> ids2, ids3;
  for (const auto& s : cfg.labels2)
    if (std::abs(s.site) <= rp.box) ids2.push_back(s.id);
  for (const auto& s : cfg.labels3)
    if (std::abs(s.site) <= rp.box) ids3.push_back(s.id);
  MultiTypeProcess proc(std::move(cfg), clock, p);
  proc.advance(rp.horizon);
  std::vector<std::uint32_t> out;
  for (auto id : ids2) out.push_back(proc.state().ledger().counts2[id]);
  for (auto id : ids3) out.push_back(proc.state().ledger().counts3[id]);
  return out;
}

inline TailCurve takeover_tail(const JumpDistribution& p, std::size_t replicas, const MultitypeRunParams& rp,
                               std::uint64_t seed) {
  std::vector<std::uint32_t> all;
  for (std::size_t r = 0; r < replicas; ++r) {
    auto c = takeover_counts(p, rp, hash_words(seed, {0x7a11, r}));
    all.insert(all.end(), c.begin(), c.end());
  }
  return survival_curve(all);
}

/// Y_{t,w} for one replica started from a random ordered pair.
inline std::int64_t y_sample(const JumpDistribution& p, double t, Site w, std::uint64_t seed, Site margin = 8) {
  MultitypeRunParams rp;
  rp.box = w;
  rp.horizon = t;
  rp.margin = margin;
  const Site W = multitype_half_width(p, rp, w);
  ClockField clock(seed, t);
  CounterRng rng = clock.substream({StreamFamily::Aux, 0, 0, 3});
  auto [hm, hp] = random_ordered_pair(rng, -W, W);
  MultiTypeProcess proc(encode_pair(hm, hp), clock, p);
  proc.advance(t);
  return y_statistic(proc.state().config(), t, w, p.range());
}

}  // namespace kpzlab
