#pragma once

// Seeded Poisson clocks. Every stream is a pure function of
// (master seed, stream key), so coupled copies can share randomness without
// sharing any mutable generator state.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "kpzlab/lattice.hpp"
#include "kpzlab/random.hpp"

namespace kpzlab {

enum class StreamFamily : std::int32_t {
  Exotic = 1,    // (particle label, hole label) class, direction
  Basic = 2,     // (site, jump vector)
  Particle = 3,  // particle label, direction
  Hole = 4,      // hole label, direction
  Aux = 5        // auxiliary uniforms (annihilation choices, initial data)
};

struct StreamKey {
  StreamFamily family = StreamFamily::Basic;
  std::int64_t i = 0;
  std::int64_t j = 0;
  std::int32_t dir = 0;

  friend auto operator<=>(const StreamKey&, const StreamKey&) = default;
  friend bool operator==(const StreamKey&, const StreamKey&) = default;

  std::string to_string() const {
    return std::to_string(static_cast<int>(family)) + ':' + std::to_string(i) + ':' +
           std::to_string(j) + ':' + std::to_string(dir);
  }
};

struct StreamKeyHash {
  std::size_t operator()(const StreamKey& k) const noexcept {
    return static_cast<std::size_t>(hash_words(0, {static_cast<std::uint64_t>(k.family),
                                                   static_cast<std::uint64_t>(k.i),
                                                   static_cast<std::uint64_t>(k.j),
                                                   static_cast<std::uint64_t>(k.dir)}));
  }
};

inline StreamKey basic_key(Site x, std::int64_t v) { return {StreamFamily::Basic, x, v, 0}; }

/// Canonical class of (l, k) in Z^2 / (a, b)Z.
struct ExoticIndex {
  std::int64_t a = 1;
  std::int64_t b = 1;
  std::int64_t ell = 0;  // representative
  std::int64_t k = 0;

  friend bool operator==(const ExoticIndex&, const ExoticIndex&) = default;

  StreamKey stream_key(std::int32_t dir) const { return {StreamFamily::Exotic, ell, k, dir}; }
};

inline ExoticIndex quotient_key(std::int64_t ell, std::int64_t k, std::int64_t a, std::int64_t b) {
  if (a < 0 || b < 0) throw std::invalid_argument("quotient_key: (a,b) must be non-negative");
  if (a == 0 && b == 0) throw std::invalid_argument("quotient_key: (a,b) = (0,0)");
  if (a > 0) {
    const std::int64_t q = floor_div(ell, a);
    return {a, b, ell - q * a, k - q * b};
  }
  return {a, b, ell, floor_mod(k, b)};
}

struct PoissonStream {
  double rate = 0.0;
  double horizon = 0.0;
  std::vector<double> events;  // strictly increasing, in (0, horizon]
};

/// Events in the half-open window (s, t].
inline std::vector<double> events_in(const PoissonStream& stream, double s, double t) {
  if (s > t) throw std::invalid_argument("events_in: s > t");
  auto first = std::upper_bound(stream.events.begin(), stream.events.end(), s);
  auto last = std::upper_bound(first, stream.events.end(), t);
  return {first, last};
}

/// First event strictly after tau, or +inf.
inline double next_event_after(const PoissonStream& stream, double tau) {
  auto it = std::upper_bound(stream.events.begin(), stream.events.end(), tau);
  return it == stream.events.end() ? std::numeric_limits<double>::infinity() : *it;
}

class ClockField {
 public:
  using Alias = std::function<StreamKey(const StreamKey&)>;

  ClockField(std::uint64_t master_seed, double horizon)
      : seed_(master_seed), horizon_(horizon), state_(std::make_shared<State>()) {
    if (!(horizon >= 0.0)) throw std::invalid_argument("ClockField: horizon must be >= 0");
  }

  /// A field whose only events are the pinned ones; every other key is silent.
  static ClockField pinned_only(double horizon) {
    ClockField f(0, horizon);
    f.pinned_only_ = true;
    return f;
  }

  std::uint64_t master_seed() const noexcept { return seed_; }
  double horizon() const noexcept { return horizon_; }

  /// Replaces the stream of `key` by an explicit event list.
  void pin(const StreamKey& key, std::vector<double> events, double rate = 1.0) {
    std::sort(events.begin(), events.end());
    for (double e : events)
      if (!(e > 0.0 && e <= horizon_)) throw std::invalid_argument("ClockField::pin: event outside (0,T]");
    std::lock_guard lock(state_->mutex);
    state_->pinned[key] = PoissonStream{rate, horizon_, std::move(events)};
    state_->memo.erase(key);
  }

  /// Keys are resolved through the alias before lookup. Used to identify
  /// streams of different coupling schemes with each other.
  void set_alias(Alias alias) { alias_ = std::move(alias); }

  StreamKey resolve(const StreamKey& key) const { return alias_ ? alias_(key) : key; }

  const PoissonStream& stream(const StreamKey& key, double rate) const {
    if (rate < 0.0) throw std::invalid_argument("ClockField: negative rate");
    const StreamKey k = resolve(key);
    std::lock_guard lock(state_->mutex);
    if (auto it = state_->memo.find(k); it != state_->memo.end()) {
      if (it->second.rate != rate && !state_->pinned.count(k))
        throw std::logic_error("ClockField: stream " + k.to_string() + " requested at two rates");
      return it->second;
    }
    PoissonStream s;
    if (auto p = state_->pinned.find(k); p != state_->pinned.end()) {
      s = p->second;
    } else {
      s.rate = rate;
      s.horizon = horizon_;
      if (!pinned_only_ && rate > 0.0) {
        CounterRng rng(stream_seed(k));
        double t = rng.exponential(rate);
        while (t <= horizon_) {
          s.events.push_back(t);
          t += rng.exponential(rate);
        }
      }
    }
    return state_->memo.emplace(k, std::move(s)).first->second;
  }

  /// Independent uniform source keyed by `key`; disjoint from the Poisson streams.
  CounterRng substream(const StreamKey& key) const {
    return CounterRng(hash_words(seed_ ^ 0xa0761d6478bd642fULL,
                                 {static_cast<std::uint64_t>(key.family), static_cast<std::uint64_t>(key.i),
                                  static_cast<std::uint64_t>(key.j), static_cast<std::uint64_t>(key.dir)}));
  }

  std::size_t materialized_count() const {
    std::lock_guard lock(state_->mutex);
    return state_->memo.size();
  }

  /// CSV (time, key, rate) of every materialized event, time-ordered.
  void write_event_log(std::ostream& os) const {
    std::vector<std::tuple<double, StreamKey, double>> rows;
    {
      std::lock_guard lock(state_->mutex);
      for (const auto& [k, s] : state_->memo)
        for (double e : s.events) rows.emplace_back(e, k, s.rate);
    }
    std::sort(rows.begin(), rows.end());
    os << "time,key,rate\n";
    for (const auto& [t, k, r] : rows) os << format_value(t) << ',' << k.to_string() << ',' << format_value(r) << '\n';
  }

 private:
  struct State {
    std::mutex mutex;
    std::unordered_map<StreamKey, PoissonStream, StreamKeyHash> memo;
    std::map<StreamKey, PoissonStream> pinned;
  };

  std::uint64_t stream_seed(const StreamKey& k) const {
    return hash_words(seed_, {static_cast<std::uint64_t>(k.family), static_cast<std::uint64_t>(k.i),
                              static_cast<std::uint64_t>(k.j), static_cast<std::uint64_t>(k.dir)});
  }

  std::uint64_t seed_;
  double horizon_;
  bool pinned_only_ = false;
  Alias alias_;
  std::shared_ptr<State> state_;
};

inline PoissonStream sample_stream(const ClockField& field, const StreamKey& key, double rate) {
  return field.stream(key, rate);
}

}  // namespace kpzlab
