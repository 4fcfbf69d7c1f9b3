#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "kpzlab/clock.hpp"

using namespace kpzlab;

TEST(QuotientKey, Examples) {
  // (1,0): every particle label collapses, the hole label survives.
  EXPECT_EQ(quotient_key(5, 3, 1, 0), (ExoticIndex{1, 0, 0, 3}));
  EXPECT_EQ(quotient_key(-7, 3, 1, 0), (ExoticIndex{1, 0, 0, 3}));
  // (0,1): the particle label survives.
  EXPECT_EQ(quotient_key(5, 3, 0, 1), (ExoticIndex{0, 1, 5, 0}));
  // (1,1): classes are indexed by k - l.
  EXPECT_EQ(quotient_key(2, 5, 1, 1), (ExoticIndex{1, 1, 0, 3}));
  EXPECT_EQ(quotient_key(-4, -1, 1, 1), (ExoticIndex{1, 1, 0, 3}));
  // (2,1): l mod 2 is the representative.
  EXPECT_EQ(quotient_key(5, 0, 2, 1), (ExoticIndex{2, 1, 1, -2}));
  EXPECT_EQ(quotient_key(-1, 0, 2, 1), (ExoticIndex{2, 1, 1, 1}));
  EXPECT_THROW(quotient_key(0, 0, 0, 0), std::invalid_argument);
  EXPECT_THROW(quotient_key(0, 0, -1, 1), std::invalid_argument);
}

TEST(QuotientKey, ClassesAreExactlyOrbits) {
  for (std::int64_t a = 0; a <= 3; ++a)
    for (std::int64_t b = 0; b <= 3; ++b) {
      if (a == 0 && b == 0) continue;
      for (std::int64_t l = -6; l <= 6; ++l)
        for (std::int64_t k = -6; k <= 6; ++k) {
          const auto c = quotient_key(l, k, a, b);
          for (std::int64_t m = -3; m <= 3; ++m)
            ASSERT_EQ(quotient_key(l + m * a, k + m * b, a, b), c);
          // the representative lies in the class
          bool found = false;
          for (std::int64_t m = -12; m <= 12 && !found; ++m)
            found = (l + m * a == c.ell && k + m * b == c.k);
          ASSERT_TRUE(found);
        }
    }
}

TEST(ClockField, StreamIsPureFunctionOfSeedAndKey) {
  const ClockField a(123, 50.0), b(123, 50.0);
  const auto k1 = basic_key(4, 1), k2 = basic_key(-9, 1);
  // materialise in opposite orders
  const auto a1 = a.stream(k1, 1.0).events;
  const auto a2 = a.stream(k2, 1.0).events;
  const auto b2 = b.stream(k2, 1.0).events;
  const auto b1 = b.stream(k1, 1.0).events;
  EXPECT_EQ(a1, b1);
  EXPECT_EQ(a2, b2);
  EXPECT_NE(a1, a2);
  EXPECT_NE(ClockField(124, 50.0).stream(k1, 1.0).events, a1);
}

TEST(ClockField, EventsAreIncreasingInsideHorizon) {
  const ClockField f(7, 10.0);
  for (Site x = -50; x <= 50; ++x) {
    const auto& e = f.stream(basic_key(x, 1), 2.0).events;
    for (std::size_t i = 0; i < e.size(); ++i) {
      EXPECT_GT(e[i], 0.0);
      EXPECT_LE(e[i], 10.0);
      if (i) {
        EXPECT_LT(e[i - 1], e[i]);
      }
    }
  }
}

TEST(ClockField, PoissonCountsAndGaps) {
  const double rate = 1.5, T = 4.0;
  const ClockField f(99, T);
  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  std::size_t late_first = 0, first_window = 0;
  for (int i = 0; i < n; ++i) {
    const auto& e = f.stream(basic_key(i, 1), rate).events;
    const double c = static_cast<double>(e.size());
    sum += c;
    sum2 += c * c;
    if (e.empty() || e[0] > 1.0) ++late_first;
    first_window += events_in(f.stream(basic_key(i, 1), rate), 0.0, 1.0).size();
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, rate * T, 0.06);
  EXPECT_NEAR(sum2 / n - mean * mean, rate * T, 0.2);
  EXPECT_NEAR(static_cast<double>(first_window) / n, rate, 0.03);
  EXPECT_NEAR(static_cast<double>(late_first) / n, std::exp(-rate), 0.01);
}

TEST(ClockField, SecondRateForSameStreamIsAnError) {
  const ClockField f(1, 5.0);
  f.stream(basic_key(0, 1), 1.0);
  EXPECT_THROW(f.stream(basic_key(0, 1), 2.0), std::logic_error);
  EXPECT_THROW(f.stream(basic_key(1, 1), -1.0), std::invalid_argument);
}

TEST(ClockField, PinnedStreamsOverride) {
  ClockField f(1, 5.0);
  f.pin(basic_key(3, 1), {2.0, 0.5});
  EXPECT_EQ(f.stream(basic_key(3, 1), 1.0).events, (std::vector<double>{0.5, 2.0}));
  EXPECT_THROW(f.pin(basic_key(3, 1), {6.0}), std::invalid_argument);
  auto p = ClockField::pinned_only(5.0);
  p.pin(basic_key(0, 1), {1.0});
  EXPECT_EQ(p.stream(basic_key(0, 1), 1.0).events.size(), 1u);
  EXPECT_TRUE(p.stream(basic_key(1, 1), 1.0).events.empty());
}

TEST(ClockField, AliasSharesStreams) {
  ClockField f(5, 5.0);
  f.set_alias([](const StreamKey& k) { return k.family == StreamFamily::Exotic ? basic_key(k.j, 1) : k; });
  const ClockField plain(5, 5.0);
  EXPECT_EQ(f.stream(StreamKey{StreamFamily::Exotic, 0, 7, 1}, 1.0).events,
            plain.stream(basic_key(7, 1), 1.0).events);
}

TEST(ClockField, WindowQueries) {
  const PoissonStream s{1.0, 10.0, {1.0, 2.0, 3.5}};
  EXPECT_EQ(events_in(s, 1.0, 3.5), (std::vector<double>{2.0, 3.5}));
  EXPECT_TRUE(events_in(s, 3.5, 9.0).empty());
  EXPECT_THROW(events_in(s, 2.0, 1.0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(next_event_after(s, 1.0), 2.0);
  EXPECT_TRUE(std::isinf(next_event_after(s, 3.5)));
}

TEST(ClockField, EventLogIsTimeOrdered) {
  const ClockField f(2, 3.0);
  for (Site x = 0; x < 5; ++x) f.stream(basic_key(x, 1), 1.0);
  std::stringstream ss;
  f.write_event_log(ss);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "time,key,rate");
  double prev = 0.0;
  std::size_t rows = 0;
  while (std::getline(ss, line)) {
    const double t = std::stod(line.substr(0, line.find(',')));
    EXPECT_GE(t, prev);
    prev = t;
    ++rows;
  }
  std::size_t expected = 0;
  for (Site x = 0; x < 5; ++x) expected += f.stream(basic_key(x, 1), 1.0).events.size();
  EXPECT_EQ(rows, expected);
  EXPECT_EQ(f.materialized_count(), 5u);
}

TEST(ClockField, SubstreamsAreDisjointFromPoissonStreams) {
  const ClockField f(3, 1.0);
  auto a = f.substream(basic_key(0, 1));
  CounterRng b(hash_words(3, {2, 0, 1, 0}));
  EXPECT_NE(a(), b());
  EXPECT_EQ(f.substream(basic_key(0, 1))(), f.substream(basic_key(0, 1))());
}
