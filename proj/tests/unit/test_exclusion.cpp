#include <gtest/gtest.h>

#include <set>

#include "kpzlab/exclusion.hpp"

using namespace kpzlab;

namespace {

HeightFunction from_occupancy(Site lo, std::vector<std::uint8_t> occ, Height anchor = 0) {
  return height_from_particles({lo, std::move(occ), anchor});
}

// Brute-force exotic dynamics: every stream that could ever matter is
// materialised up front, all events are merged, and at each event every bond
// of every copy is re-classified from scratch.
std::vector<std::vector<Height>> naive_exotic(std::vector<HeightFunction> init, const ClockField& clock,
                                              ExoticCoupling c, double pr, double pl, double until) {
  const Site lo = init.front().lo(), hi = init.front().hi();
  std::vector<std::vector<Height>> h;
  for (const auto& f : init) h.emplace_back(f.values().begin(), f.values().end());
  auto H = [&](std::size_t cp, Site x) { return h[cp][static_cast<std::size_t>(x - lo)]; };
  auto occ = [&](std::size_t cp, Site x) { return H(cp, x + 1) > H(cp, x); };

  std::set<std::int64_t> ells, ks;
  for (std::size_t cp = 0; cp < h.size(); ++cp)
    for (Site x = lo; x < hi; ++x) {
      if (occ(cp, x)) ells.insert(-(H(cp, x) + x) / 2);
      else ks.insert((x - H(cp, x)) / 2);
    }
  std::set<StreamKey> keys;
  for (auto l : ells)
    for (auto k : ks)
      for (int dir : {1, -1})
        if ((dir > 0 ? pr : pl) > 0.0) keys.insert(quotient_key(l, k, c.a, c.b).stream_key(dir));
  std::vector<std::pair<double, StreamKey>> events;
  for (const auto& k : keys)
    for (double t : events_in(clock.stream(k, k.dir > 0 ? pr : pl), 0.0, until)) events.emplace_back(t, k);
  std::sort(events.begin(), events.end());

  for (const auto& [t, key] : events) {
    for (std::size_t cp = 0; cp < h.size(); ++cp) {
      std::vector<Site> fire;
      for (Site x = lo; x + 1 <= hi - 1; ++x) {
        const bool p0 = occ(cp, x), p1 = occ(cp, x + 1);
        if (p0 == p1) continue;
        std::int64_t l, k;
        int dir;
        if (p0) {
          l = -(H(cp, x) + x) / 2;
          k = (x + 1 - H(cp, x + 1)) / 2;
          dir = 1;
        } else {
          k = (x - H(cp, x)) / 2;
          l = -(H(cp, x + 1) + x + 1) / 2;
          dir = -1;
        }
        if ((dir > 0 ? pr : pl) == 0.0) continue;
        if (quotient_key(l, k, c.a, c.b).stream_key(dir) == key) fire.push_back(x);
      }
      for (Site x : fire) h[cp][static_cast<std::size_t>(x + 1 - lo)] += key.dir > 0 ? -2 : 2;
    }
  }
  return h;
}

std::vector<Height> heights_of(const CoupledEnsemble& e, std::size_t c) {
  return {e.heights(c).begin(), e.heights(c).end()};
}

}  // namespace

TEST(JumpDistribution, Validation) {
  EXPECT_NO_THROW(JumpDistribution::tasep());
  EXPECT_NO_THROW(JumpDistribution::asep(0.7));
  EXPECT_EQ(JumpDistribution::asep(0.7).range(), 2);
  EXPECT_THROW(JumpDistribution({{1, 1.5}, {-1, 0.5}}), std::invalid_argument);  // p(1) > K = 1
  EXPECT_THROW(JumpDistribution({{2, 0.5}, {-1, 0.5}, {1, 0.5}}, 1), std::invalid_argument);
  EXPECT_NO_THROW(JumpDistribution({{2, 0.5}, {-1, 0.5}, {1, 0.5}}));
  EXPECT_THROW(JumpDistribution({{2, 0.5}}), std::invalid_argument);             // gcd 2
  EXPECT_THROW(JumpDistribution({{1, 2.0}}), std::invalid_argument);             // mean 2
  EXPECT_THROW(JumpDistribution({{0, 1.0}, {1, 1.0}}), std::invalid_argument);   // zero jump
  EXPECT_THROW(JumpDistribution({{1, 3.0}, {-1, 2.0}}), std::invalid_argument);  // p > K
  EXPECT_EQ(JumpDistribution({{2, 0.5}, {-1, 0.5}, {1, 0.5}}).range(), 2);
}

TEST(CoupledEnsemble, ApplyMoveRules) {
  CoupledEnsemble e({from_occupancy(0, {1, 0, 1, 0})}, ClockField(1, 1.0));
  e.apply_move(0, 0, 1, 0.5);
  EXPECT_EQ(heights_of(e, 0), (std::vector<Height>{0, -1, 0, 1, 0}));
  EXPECT_THROW(e.apply_move(0, 0, 1, 0.6), std::invalid_argument);  // no particle at 0
  EXPECT_THROW(e.apply_move(0, 1, 2, 0.6), std::invalid_argument);  // 2 occupied
  EXPECT_THROW(e.apply_move(0, 2, 4, 0.6), std::invalid_argument);  // leaves the window
  e.apply_move(0, 2, 0, 0.7);
  EXPECT_EQ(heights_of(e, 0), (std::vector<Height>{0, 1, 2, 1, 0}));
  EXPECT_EQ(e.log().size(), 2u);
}

TEST(ExoticEngine, HoleCouplingHandExample) {
  // particles at 0 (label 0) and 1 (label -1); holes at 2 (label 0) and 3 (label 1)
  const auto h0 = from_occupancy(0, {1, 1, 0, 0});
  auto clock = ClockField::pinned_only(5.0);
  clock.pin({StreamFamily::Exotic, 0, 0, 1}, {1.0, 2.0});
  auto e = evolve_asep_exotic(CoupledEnsemble({h0}, clock), {1, 0}, 1.0, 0.0, 5.0);
  // hole 0 pulls the particle on its left in twice
  EXPECT_EQ(e.copy(0), from_occupancy(0, {0, 1, 1, 0}));
}

TEST(ExoticEngine, ParticleCouplingHandExample) {
  const auto h0 = from_occupancy(0, {1, 1, 0, 0});
  auto blocked = ClockField::pinned_only(5.0);
  blocked.pin({StreamFamily::Exotic, 0, 0, 1}, {1.0});
  EXPECT_EQ(evolve_asep_exotic(CoupledEnsemble({h0}, blocked), {0, 1}, 1.0, 0.0, 5.0).copy(0), h0);
  auto free = ClockField::pinned_only(5.0);
  free.pin({StreamFamily::Exotic, -1, 0, 1}, {1.0, 2.0});
  EXPECT_EQ(evolve_asep_exotic(CoupledEnsemble({h0}, free), {0, 1}, 1.0, 0.0, 5.0).copy(0),
            from_occupancy(0, {1, 0, 0, 1}));
}

TEST(ExoticEngine, MatchesNaiveOracle) {
  const std::vector<ExoticCoupling> couplings{{1, 0}, {0, 1}, {1, 1}, {2, 1}, {1, 2}, {3, 1}};
  for (const auto c : couplings)
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      ClockField clock(hash_words(seed, {static_cast<std::uint64_t>(c.a), static_cast<std::uint64_t>(c.b)}), 3.0);
      CounterRng rng(seed + 100);
      const auto h = sample_walk(rng, -12, 12);
      const auto g = sample_walk(rng, -12, 12);
      const std::vector<HeightFunction> init{h, g};
      const double pl = seed % 2 ? 0.0 : 0.6;
      const auto oracle = naive_exotic(init, clock, c, 1.0 + pl, pl, 3.0);
      const auto e = evolve_asep_exotic(CoupledEnsemble(init, clock), c, 1.0 + pl, pl, 3.0);
      for (std::size_t cp = 0; cp < 2; ++cp)
        ASSERT_EQ(heights_of(e, cp), oracle[cp]) << c.a << ":" << c.b << " seed " << seed;
    }
}

TEST(ExoticEngine, DiagonalCouplingEqualsBasicAsep) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double p = 0.4;
    ClockField base(seed, 4.0);
    ClockField aliased = base;
    aliased.set_alias([](const StreamKey& k) {
      if (k.family != StreamFamily::Exotic) return k;
      return k.dir > 0 ? basic_key(k.j, 1) : basic_key(k.j + 1, -1);
    });
    CounterRng rng(seed);
    const auto h = sample_walk(rng, -20, 20);
    const auto ex = evolve_asep_exotic(CoupledEnsemble({h}, aliased), {1, 1}, p + 1.0, p, 4.0);
    const auto bs = evolve_aep_basic(CoupledEnsemble({h}, base), JumpDistribution::asep(p), 4.0);
    ASSERT_EQ(ex.copy(0), bs.copy(0)) << "seed " << seed;
  }
}

TEST(ExoticEngine, LiteralOrientationSwapsRates) {
  const auto h0 = from_occupancy(0, {1, 0, 0, 0, 0, 0});
  const auto std_run = evolve_asep_exotic(CoupledEnsemble({h0}, ClockField(3, 20.0)), {1, 1}, 1.0, 0.0, 20.0);
  const auto lit_run = evolve_asep_exotic(CoupledEnsemble({h0}, ClockField(3, 20.0)), {1, 1}, 1.0, 0.0, 20.0,
                                          RateOrientation::Literal);
  EXPECT_NE(std_run.copy(0), h0);   // the particle drifts right
  EXPECT_EQ(lit_run.copy(0), h0);   // right jumps now have rate 0
}

TEST(ExoticEngine, RejectsBadParameters) {
  CoupledEnsemble e({from_occupancy(0, {1, 0})}, ClockField(1, 1.0));
  EXPECT_THROW(ExoticEngine(e, {0, 0}, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(ExoticEngine(e, {1, 1}, -1.0, 0.0), std::invalid_argument);
  CoupledEnsemble odd({HeightFunction(0, {1, 0, 1})}, ClockField(1, 1.0));
  EXPECT_THROW(ExoticEngine(odd, {1, 1}, 1.0, 0.0), std::invalid_argument);
}

TEST(BasicEngine, ParticleCountConservedAndExclusionHolds) {
  const JumpDistribution p({{2, 0.5}, {-1, 0.5}, {1, 0.5}});
  CounterRng rng(2);
  const auto h = sample_walk(rng, -30, 30);
  const auto e = evolve_aep_basic(CoupledEnsemble({h}, ClockField(2, 5.0)), p, 5.0);
  EXPECT_EQ(e.height(0, -30), h(-30));
  EXPECT_EQ(e.height(0, 30), h(30));
  EXPECT_GT(e.log().size(), 0u);
  for (const auto& m : e.log()) EXPECT_TRUE(p.rate(m.to - m.from) > 0.0);
}

TEST(BasicEngine, TwoStepJumpHandExample) {
  auto clock = ClockField::pinned_only(3.0);
  clock.pin(basic_key(0, 2), {1.0});
  clock.pin(basic_key(0, 1), {0.5});  // blocked: site 1 occupied
  const JumpDistribution p({{2, 0.5}, {-1, 0.5}, {1, 0.5}});
  const auto e = evolve_aep_basic(CoupledEnsemble({from_occupancy(0, {1, 1, 0, 0})}, clock), p, 3.0);
  EXPECT_EQ(e.copy(0), from_occupancy(0, {0, 1, 1, 0}));
}

TEST(Monotonicity, CheckerFlagsInjectedViolation) {
  const auto low = from_occupancy(0, {1, 0, 0, 1});
  const auto high = from_occupancy(0, {1, 0, 1, 0});
  ASSERT_TRUE(low.dominated_by(high));
  CoupledEnsemble e({low, high}, ClockField(1, 1.0));
  e.begin_event();
  e.apply_move(1, 0, 1, 0.25);
  const auto rep = check_monotone(e);
  ASSERT_FALSE(rep.ok);
  EXPECT_EQ(rep.violation->site, 1);
  EXPECT_EQ(rep.violation->lower, 0u);
  EXPECT_EQ(rep.violation->upper, 1u);
  EXPECT_DOUBLE_EQ(rep.violation->time, 0.25);
  EXPECT_TRUE(check_monotone(e, CertifiedRegion{2, 4}).ok);
}

TEST(Monotonicity, HoldsForEveryCouplingOnOrderedPairs) {
  for (const ExoticCoupling c : std::vector<ExoticCoupling>{{1, 0}, {0, 1}, {1, 1}, {2, 1}, {1, 2}})
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      CounterRng rng(seed * 31 + 7);
      const auto h = sample_walk(rng, -20, 20);
      const auto w = sample_walk(rng, -20, 20);
      std::vector<Height> top;
      for (Site x = -20; x <= 20; ++x) top.push_back(std::max(h(x), w(x)));
      const HeightFunction g(-20, top);
      auto e = evolve_asep_exotic(CoupledEnsemble({h, g}, ClockField(seed, 4.0)), c, 1.5, 0.5, 4.0);
      ASSERT_TRUE(check_monotone(e).ok) << c.a << ":" << c.b << " seed " << seed;
    }
}

TEST(Monotonicity, HoldsForBasicAep) {
  const JumpDistribution p({{2, 0.5}, {-1, 0.5}, {1, 0.5}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CounterRng rng(seed);
    const auto h = sample_walk(rng, -20, 20);
    const auto w = sample_walk(rng, -20, 20);
    std::vector<Height> top;
    for (Site x = -20; x <= 20; ++x) top.push_back(std::max(h(x), w(x)));
    auto e = evolve_aep_basic(CoupledEnsemble({h, HeightFunction(-20, top)}, ClockField(seed, 4.0)), p, 4.0);
    ASSERT_TRUE(check_monotone(e).ok) << "seed " << seed;
  }
}

TEST(CertifiedRegion, Margins) {
  const auto r = certified_region(-40, 40, 1, 2.0);
  EXPECT_EQ(r.lo, -32);
  EXPECT_EQ(r.hi, 32);
  const auto r2 = certified_region(-40, 40, 2, 0.5);
  EXPECT_EQ(r2.lo, -32);
  EXPECT_TRUE(certified_region(-4, 4, 1, 2.0).empty());
  EXPECT_EQ(certified_region(0, 10, 1, 0.0).lo, 0);
  EXPECT_THROW(certified_region(0, 10, 1, -1.0), std::invalid_argument);
}

TEST(ShiftEquivariance, AdmissibleShiftsCommuteWithDynamics) {
  for (const ExoticCoupling c : std::vector<ExoticCoupling>{{1, 0}, {0, 1}, {1, 1}, {2, 1}})
    for (std::int64_t m = -2; m <= 2; ++m) {
      if (!shift_admissible(c, m)) {
        EXPECT_THROW(shift_equivariance_check(c, m, 1, 2.0), std::invalid_argument);
        continue;
      }
      for (std::uint64_t seed = 0; seed < 5; ++seed)
        EXPECT_TRUE(shift_equivariance_check(c, m, seed, 4.0)) << c.a << ":" << c.b << " m " << m;
    }
}

TEST(ShiftEquivariance, WrongShiftIsDetected) {
  // Raising a profile by 2 relabels every hole, so the hole coupling is not
  // equivariant under it.
  int mismatches = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ClockField clock(seed, 4.0);
    CounterRng rng(seed);
    const auto h0 = sample_walk(rng, -32, 32);
    CoupledEnsemble e1({h0}, clock), e2({shift_map(h0, 0, 2)}, clock);
    ExoticEngine(e1, {1, 0}, 1.5, 0.5).advance(4.0);
    ExoticEngine(e2, {1, 0}, 1.5, 0.5).advance(4.0);
    if (!(shift_map(e1.copy(0), 0, 2) == e2.copy(0))) ++mismatches;
  }
  EXPECT_GT(mismatches, 0);
}
