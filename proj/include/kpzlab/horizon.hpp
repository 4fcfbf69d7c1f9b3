#pragma once

// Last passage over ensembles of drifted walks, the ensemble R_i built from
// it, and a discrete test of its two-line stationarity under TASEP.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpzlab/clock.hpp"
#include "kpzlab/exclusion.hpp"
#include "kpzlab/lattice.hpp"
#include "kpzlab/stats.hpp"

namespace kpzlab {

/// k walks on the grid {-L, -L+step, ..., L}; walk i has drift drifts[i].
struct DriftedWalkEnsemble {
  double step = 0.1;
  std::size_t half = 0;  // grid index of position 0; grid size 2*half+1
  std::vector<double> drifts;
  std::vector<std::vector<double>> walks;

  std::size_t size() const noexcept { return 2 * half + 1; }
  double position(std::size_t i) const { return (static_cast<double>(i) - static_cast<double>(half)) * step; }
  std::size_t index_of(double x) const {
    const double r = std::round(x / step) + static_cast<double>(half);
    if (r < 0.0 || r >= static_cast<double>(size())) throw std::out_of_range("DriftedWalkEnsemble: off grid");
    return static_cast<std::size_t>(r);
  }
};

/// Independent two-sided walks vanishing at 0 with Gaussian increments of
/// mean a_i * step and variance 2 * step.
inline DriftedWalkEnsemble sample_drifted_walks(CounterRng& rng, const std::vector<double>& drifts, double step,
                                                double L) {
  if (drifts.empty()) throw std::invalid_argument("sample_drifted_walks: no drifts");
  for (std::size_t i = 1; i < drifts.size(); ++i)
    if (!(drifts[i] > drifts[i - 1])) throw std::invalid_argument("sample_drifted_walks: drifts must increase");
  DriftedWalkEnsemble e;
  e.step = step;
  e.half = static_cast<std::size_t>(std::llround(L / step));
  e.drifts = drifts;
  const double sd = std::sqrt(2.0 * step);
  for (double a : drifts) {
    std::vector<double> w(e.size(), 0.0);
    for (std::size_t i = e.half + 1; i < w.size(); ++i) w[i] = w[i - 1] + rng.normal(a * step, sd);
    for (std::size_t i = e.half; i-- > 0;) w[i] = w[i + 1] - rng.normal(a * step, sd);
    e.walks.push_back(std::move(w));
  }
  return e;
}

/// G_1 where G_i = f_i and G_j(x) = f_j(x) + max_{y <= x} (G_{j+1}(y) - f_j(y)):
/// the value f[i -> x] for every grid point x.
inline std::vector<double> last_passage_all(const std::vector<std::vector<double>>& f, std::size_t i) {
  if (i < 1 || i > f.size()) throw std::out_of_range("last_passage: level out of range");
  std::vector<double> g = f[i - 1];
  for (std::size_t j = i - 1; j-- > 0;) {
    const auto& fj = f[j];
    double run = kNegInf;
    std::vector<double> next(g.size());
    for (std::size_t x = 0; x < g.size(); ++x) {
      run = std::max(run, g[x] - fj[x]);
      next[x] = fj[x] + run;
    }
    g.swap(next);
  }
  return g;
}

inline double last_passage(const std::vector<std::vector<double>>& f, std::size_t i, std::size_t x) {
  return last_passage_all(f, i).at(x);
}

struct HorizonEnsemble {
  double step = 0.1;
  std::size_t half = 0;
  std::vector<std::vector<double>> R;
};

/// R_i(x) = B[i -> x] - B[i -> 0].
inline HorizonEnsemble horizon_from_walks(const DriftedWalkEnsemble& B) {
  HorizonEnsemble h{B.step, B.half, {}};
  for (std::size_t i = 1; i <= B.walks.size(); ++i) {
    auto r = last_passage_all(B.walks, i);
    const double r0 = r[B.half];
    for (auto& v : r) v -= r0;
    h.R.push_back(std::move(r));
  }
  return h;
}

/// Lattice walk embedding R at scale eps: samples at grid step eps sit on
/// even lattice sites; the minimal dominating walk is taken and unscaled.
inline HeightFunction embed_horizon_line(const std::vector<double>& r, std::size_t half, double eps) {
  const auto n = static_cast<Site>(half);
  std::vector<double> s(static_cast<std::size_t>(4 * n + 1), kNegInf);
  for (std::size_t j = 0; j < r.size(); ++j) s[2 * j] = r[j];
  return unscale_walk(srw_envelope(GridFunction(eps, -2 * n, std::move(s))));
}

/// Lattice analogue of the ensemble: walks with up-step probability
/// (1 + a_i eps^{1/2} / 2) / 2 on [-W, W], combined by the same last passage
/// and recentred at 0.
inline std::vector<HeightFunction> bernoulli_horizon(CounterRng& rng, const std::vector<double>& drifts, double eps,
                                                     Site W) {
  std::vector<std::vector<double>> f;
  for (double a : drifts) {
    const double up = (1.0 + a * std::sqrt(eps) / 2.0) / 2.0;
    if (!(up > 0.0 && up < 1.0)) throw std::invalid_argument("bernoulli_horizon: drift too large for this scale");
    const auto h = sample_walk(rng, -W, W, up);
    f.emplace_back(h.values().begin(), h.values().end());
  }
  std::vector<HeightFunction> out;
  for (std::size_t i = 1; i <= f.size(); ++i) {
    const auto g = last_passage_all(f, i);
    const double g0 = g[static_cast<std::size_t>(W)];
    std::vector<Height> v;
    for (double x : g) v.push_back(static_cast<Height>(std::llround(x - g0)));
    out.emplace_back(-W, std::move(v));
  }
  return out;
}

enum class HorizonEmbedding {
  GaussianEnvelope,  // Gaussian walks at step eps, minimal dominating lattice walk
  BernoulliQueue     // Bernoulli walks of matching slope, last passage on the lattice
};

struct StarParams {
  std::vector<double> drifts{1.0, 2.0};
  HorizonEmbedding embedding = HorizonEmbedding::GaussianEnvelope;
  double eps = 0.1;
  double dt = 0.5;
  std::size_t replicas = 500;
  std::vector<double> increments{-1.0, -0.5, -0.25, 0.25, 0.5, 1.0};
  double slope_span = 2.0;  // slope measured as (F(span) - F(-span)) / (2 span)
  double slope_tolerance = 0.10;
  double alpha = 0.01;
  std::uint64_t seed = 1;
};

struct IncrementTest {
  std::string quantity;  // "R1", "R2" or "R2-R1"
  double dx = 0.0;
  KsResult ks;
};

struct StarReport {
  std::vector<IncrementTest> tests;
  std::vector<double> slopes;  // mean measured slope of F_i
  bool slopes_ok = true;
  bool ks_ok = true;
  bool ok() const { return slopes_ok && ks_ok; }
};

/// Lattice half-width large enough that the certified region at time
/// 2 eps^{-3/2} dt still covers every observed point.
inline Site star_half_width(const StarParams& p) {
  const double T = 2.0 * p.dt / std::pow(p.eps, 1.5);
  double reach = p.slope_span;
  for (double x : p.increments) reach = std::max(reach, std::abs(x));
  const auto need = static_cast<Site>(std::ceil(4.0 * T)) + static_cast<Site>(std::ceil(2.0 * reach / p.eps)) + 8;
  return need + (need % 2);
}

/// One replica: the embedded initial lines and the lines after TASEP time
/// 2 eps^{-3/2} dt under one basic-coupled clock, both as scaled profiles
/// recentred at 0, sampled at the lattice sites of `points`.
inline std::pair<std::vector<std::vector<double>>, std::vector<std::vector<double>>> star_replica(
    const StarParams& p, std::size_t replica, const std::vector<double>& points) {
  if (p.drifts.size() != 2) throw std::invalid_argument("property_star_test: requires k = 2");
  const Site W = star_half_width(p);
  const double T = 2.0 * p.dt / std::pow(p.eps, 1.5);
  const std::uint64_t key = hash_words(p.seed, {0x57a2, replica});
  CounterRng rng(hash_words(key, {1}));
  std::vector<HeightFunction> lines;
  if (p.embedding == HorizonEmbedding::GaussianEnvelope) {
    const double L = static_cast<double>(W / 2) * p.eps;
    const auto R = horizon_from_walks(sample_drifted_walks(rng, p.drifts, p.eps, L));
    for (const auto& r : R.R) lines.push_back(embed_horizon_line(r, R.half, p.eps));
  } else {
    lines = bernoulli_horizon(rng, p.drifts, p.eps, W);
  }
  CoupledEnsemble ens(lines, ClockField(key, T));
  ens.set_logging(false);
  BasicEngine(ens, JumpDistribution::tasep()).advance(T);
  const double u = std::sqrt(p.eps);
  std::vector<std::vector<double>> before(2), after(2);
  for (std::size_t i = 0; i < 2; ++i)
    for (double x : points) {
      const Site s = lattice_site(x, p.eps);
      before[i].push_back(u * static_cast<double>(lines[i](s) - lines[i](0)));
      after[i].push_back(u * static_cast<double>(ens.height(i, s) - ens.height(i, 0)));
    }
  return {before, after};
}

/// Two-sample KS on the recentred increments of (R_1, R_2, R_2 - R_1) before
/// and after evolution, plus the slope check on F_i.
inline StarReport property_star_test(const StarParams& p) {
  if (p.drifts.size() != 2) throw std::invalid_argument("property_star_test: requires k = 2");
  std::vector<double> points = p.increments;
  points.push_back(-p.slope_span);
  points.push_back(p.slope_span);
  const std::size_t ni = p.increments.size();
  // samples[q][k][before/after]
  std::vector<std::vector<std::vector<double>>> before(3, std::vector<std::vector<double>>(ni)),
      after(3, std::vector<std::vector<double>>(ni));
  std::vector<double> slope_sum(2, 0.0);
  for (std::size_t r = 0; r < p.replicas; ++r) {
    const auto [b, a] = star_replica(p, r, points);
    for (std::size_t k = 0; k < ni; ++k) {
      for (std::size_t i = 0; i < 2; ++i) {
        before[i][k].push_back(b[i][k]);
        after[i][k].push_back(a[i][k]);
      }
      before[2][k].push_back(b[1][k] - b[0][k]);
      after[2][k].push_back(a[1][k] - a[0][k]);
    }
    for (std::size_t i = 0; i < 2; ++i) slope_sum[i] += (a[i][ni + 1] - a[i][ni]) / (2.0 * p.slope_span);
  }
  StarReport rep;
  const char* names[3] = {"R1", "R2", "R2-R1"};
  for (std::size_t q = 0; q < 3; ++q)
    for (std::size_t k = 0; k < ni; ++k) {
      IncrementTest t{names[q], p.increments[k], ks_two_sample(before[q][k], after[q][k], p.alpha)};
      rep.ks_ok = rep.ks_ok && t.ks.pass;
      rep.tests.push_back(t);
    }
  for (std::size_t i = 0; i < 2; ++i) {
    rep.slopes.push_back(slope_sum[i] / static_cast<double>(p.replicas));
    if (std::abs(rep.slopes[i] - p.drifts[i]) > p.slope_tolerance * std::abs(p.drifts[i])) rep.slopes_ok = false;
  }
  return rep;
}

/// Increments h(w) - h(0) of a Bernoulli(1/2) walk at time 0 and after TASEP
/// time T, one value per replica and per w.
struct StationaritySamples {
  std::vector<Site> ws;
  std::vector<std::vector<double>> initial;
  std::vector<std::vector<double>> evolved;
};

inline StationaritySamples tasep_stationarity_samples(std::uint64_t seed, std::size_t replicas, double T,
                                                      const std::vector<Site>& ws) {
  Site reach = 0;
  for (Site w : ws) reach = std::max(reach, std::abs(w));
  const Site W = static_cast<Site>(std::ceil(4.0 * T)) + reach + 4;
  StationaritySamples out{ws, std::vector<std::vector<double>>(ws.size()), std::vector<std::vector<double>>(ws.size())};
  for (std::size_t r = 0; r < replicas; ++r) {
    const std::uint64_t key = hash_words(seed, {0x57a7, r});
    CounterRng rng(hash_words(key, {1}));
    const HeightFunction h0 = sample_walk(rng, -W, W);
    CoupledEnsemble ens({h0}, ClockField(key, T));
    ens.set_logging(false);
    BasicEngine(ens, JumpDistribution::tasep()).advance(T);
    for (std::size_t k = 0; k < ws.size(); ++k) {
      out.initial[k].push_back(static_cast<double>(h0(ws[k]) - h0(0)));
      out.evolved[k].push_back(static_cast<double>(ens.height(0, ws[k]) - ens.height(0, 0)));
    }
  }
  return out;
}

}  // namespace kpzlab
