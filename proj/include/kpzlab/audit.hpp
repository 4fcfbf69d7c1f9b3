#pragma once

// Orchestration of the five landscape/coupling axioms as audits, each with
// its raw statistics, under one ExperimentConfig.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "kpzlab/clock.hpp"
#include "kpzlab/config.hpp"
#include "kpzlab/exclusion.hpp"
#include "kpzlab/lattice.hpp"
#include "kpzlab/metric.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/stats.hpp"
#include "kpzlab/version.hpp"

namespace kpzlab {

using Json = nlohmann::ordered_json;

inline const std::vector<std::string>& audit_keys() {
  static const std::vector<std::string> keys{"triangle", "independent_increments", "marginals", "monotonicity",
                                             "shift"};
  return keys;
}

inline ExperimentConfig tolerances() {
  static const ExperimentConfig t = ExperimentConfig::load(data_path("tolerances.ini"));
  return t;
}

inline std::vector<ExoticCoupling> parse_couplings(const std::string& spec) {
  // "1:1,1:0,0:1"
  std::vector<ExoticCoupling> out;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    auto end = spec.find(',', pos);
    if (end == std::string::npos) end = spec.size();
    const std::string item = spec.substr(pos, end - pos);
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("coupling list: expected a:b, got " + item);
    out.push_back({std::stoll(item.substr(0, colon)), std::stoll(item.substr(colon + 1))});
    pos = end + 1;
  }
  return out;
}

inline std::string coupling_name(ExoticCoupling c) { return std::to_string(c.a) + ":" + std::to_string(c.b); }

inline std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t family, std::uint64_t r) {
  return hash_words(seed, {family, r});
}

/// Scaled one-point values d^eps(0,0;0,1), one per replica.
inline std::vector<double> tasep_one_point_samples(double eps, std::size_t n, std::uint64_t seed,
                                                   std::size_t jobs = 1) {
  std::vector<double> out(n);
  const double T = 2.0 / std::pow(eps, 1.5);
  parallel_for(n, jobs, [&](std::size_t r) {
    ClockField clock(replica_seed(seed, 0x0e, r), T);
    out[r] = scaled_dpi(clock, eps, 0.0, 0.0, 0.0, 1.0);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Individual audits
// ---------------------------------------------------------------------------

inline Json audit_triangle(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t jobs) {
  const auto seeds = cfg.get<std::size_t>("triangle.seeds", 100);
  const auto half = cfg.get<Site>("triangle.half_window", 40);
  const TasepWindow w{-half, half};
  const std::vector<double> times{0.0, 1.0, 2.0, 3.0};
  const std::vector<Site> xs{-6, -3, 0, 3, 6};
  std::vector<TriangleReport> reps(seeds);
  parallel_for(seeds, jobs, [&](std::size_t r) {
    ClockField clock(replica_seed(seed, 0x71, r), times.back());
    std::vector<SpaceTime> src, dst;
    for (double t : times)
      for (Site x : xs) {
        if (t < times.back()) src.push_back({x, t});
        if (t > times.front()) dst.push_back({x, t});
      }
    reps[r] = triangle_audit(dpi_by_evolution(clock, w, src, dst));
  });
  std::size_t chains = 0, violations = 0;
  std::int64_t worst = 0;
  for (const auto& r : reps) {
    chains += r.chains;
    violations += r.violations;
    worst = std::max(worst, r.worst_excess);
  }
  return Json{{"pass", violations == 0}, {"seeds", seeds}, {"chains", chains}, {"violations", violations},
              {"worst_excess", worst}};
}

inline Json audit_independent_increments(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t jobs) {
  const auto n = cfg.get<std::size_t>("independent_increments.replicas", 1000);
  const double rho_max = tolerances().get<double>("independence.rho_max", 0.1);
  const TasepWindow w{-24, 24};
  std::vector<double> d1(n), d2(n), e1(n), e2(n);
  // A fixed sawtooth: the exclusion functional reads only the clocks of its window.
  std::vector<Height> saw;
  for (Site x = w.lo; x <= w.hi; ++x) saw.push_back(is_even(x) ? 0 : 1);
  const HeightFunction h0(w.lo, saw);
  parallel_for(n, jobs, [&](std::size_t r) {
    ClockField clock(replica_seed(seed, 0x11, r), 4.0);
    const auto g = dpi_by_evolution(clock, w, {{0, 0.0}, {0, 2.0}}, {{0, 2.0}, {0, 4.0}});
    d1[r] = static_cast<double>(g.at(0, 0).value());
    d2[r] = static_cast<double>(g.at(1, 1).value());
    CoupledEnsemble a({h0}, clock, 0.0), b({h0}, clock, 2.0);
    a.set_logging(false);
    b.set_logging(false);
    BasicEngine(a, JumpDistribution::tasep()).advance(2.0);
    BasicEngine(b, JumpDistribution::tasep()).advance(4.0);
    e1[r] = static_cast<double>(a.height(0, 0) - h0(0));
    e2[r] = static_cast<double>(b.height(0, 0) - h0(0));
  });
  const double rd = pearson(d1, d2), re = pearson(e1, e2);
  return Json{{"pass", std::abs(rd) <= rho_max && std::abs(re) <= rho_max},
              {"replicas", n},
              {"rho_metric", rd},
              {"rho_exclusion", re},
              {"rho_max", rho_max}};
}

inline Json audit_marginals(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t jobs) {
  const double eps = cfg.get<double>("marginals.eps", 0.2);
  const auto n = cfg.get<std::size_t>("marginals.replicas", 400);
  const auto tol = tolerances();
  const auto samples = tasep_one_point_samples(eps, n, seed, jobs);
  const auto& table = tw_gue_table();
  const double ks = ks_against_table(samples, table);
  const double m = mean(samples);
  const double ks_max = tol.get<double>("marginal.ks_max", 0.10);
  const double mean_tol = tol.get<double>("marginal.mean_tol", 0.15);
  return Json{{"pass", ks <= ks_max && std::abs(m - table.mean()) <= mean_tol},
              {"eps", eps},
              {"replicas", n},
              {"ks", ks},
              {"ks_max", ks_max},
              {"mean", m},
              {"table_mean", table.mean()},
              {"mean_tol", mean_tol}};
}

/// One ordered pair (h-, h+) of random walks evolved under coupling c. With
/// `mismatched`, each copy gets its own clock and the ordering is checked on
/// a time grid instead of along the shared event log.
inline MonotoneReport monotone_run(ExoticCoupling c, std::uint64_t seed, Site half, double horizon,
                                   bool mismatched, double p_right = 1.5, double p_left = 0.5) {
  ClockField clock(seed, horizon);
  CounterRng rng = clock.substream({StreamFamily::Aux, 0, 0, 5});
  const HeightFunction hp = sample_walk(rng, -half, half);
  const HeightFunction other = sample_walk(rng, -half, half);
  std::vector<Height> v;
  for (Site x = -half; x <= half; ++x) v.push_back(std::min(hp(x), other(x)));
  const HeightFunction hm(-half, v);
  if (!mismatched) {
    CoupledEnsemble ens({hm, hp}, clock);
    ExoticEngine(ens, c, p_right, p_left).advance(horizon);
    return check_monotone(ens);
  }
  CoupledEnsemble lo({hm}, clock), hi({hp}, ClockField(hash_words(seed, {0xbad}), horizon));
  lo.set_logging(false);
  hi.set_logging(false);
  ExoticEngine el(lo, c, p_right, p_left), eh(hi, c, p_right, p_left);
  MonotoneReport rep;
  for (int k = 1; k <= 64; ++k) {
    const double t = horizon * k / 64.0;
    el.advance(t);
    eh.advance(t);
    ++rep.events_checked;
    for (Site x = -half; x <= half; ++x)
      if (lo.height(0, x) > hi.height(0, x)) {
        rep.ok = false;
        rep.violation = MonotoneViolation{t, x, 0, 1};
        return rep;
      }
  }
  return rep;
}

inline Json audit_monotonicity(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t jobs) {
  const auto couplings = parse_couplings(cfg.get<std::string>("monotonicity.couplings", "1:1,1:0,0:1,2:1,1:2"));
  const auto seeds = cfg.get<std::size_t>("monotonicity.seeds", 100);
  const auto half = cfg.get<Site>("monotonicity.half_window", 32);
  const double horizon = cfg.get<double>("monotonicity.horizon", 8.0);
  const bool mismatched = cfg.get<bool>("monotonicity.mismatched_clocks", false);
  Json per = Json::object();
  bool all = true;
  for (const auto& c : couplings) {
    std::vector<char> ok(seeds, 1);
    std::vector<std::size_t> events(seeds, 0);
    parallel_for(seeds, jobs, [&](std::size_t r) {
      const auto rep = monotone_run(c, replica_seed(seed, 0x30 + static_cast<std::uint64_t>(c.a * 8 + c.b), r), half,
                                    horizon, mismatched);
      ok[r] = rep.ok;
      events[r] = rep.events_checked;
    });
    std::size_t bad = 0, ev = 0;
    for (std::size_t r = 0; r < seeds; ++r) {
      bad += ok[r] ? 0 : 1;
      ev += events[r];
    }
    per[coupling_name(c)] = Json{{"seeds", seeds}, {"violating_seeds", bad}, {"events_checked", ev}};
    all = all && bad == 0;
  }
  return Json{{"pass", all}, {"mismatched_clocks", mismatched}, {"couplings", per}};
}

inline Json audit_shift(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t jobs) {
  const auto couplings = parse_couplings(cfg.get<std::string>("shift.couplings", "1:1,1:0,0:1,2:1,1:2"));
  const auto seeds = cfg.get<std::size_t>("shift.seeds", 50);
  const double horizon = cfg.get<double>("shift.horizon", 8.0);
  Json per = Json::object();
  bool all = true;
  for (const auto& c : couplings) {
    std::vector<std::int64_t> ms;
    for (std::int64_t m = -3; m <= 3; ++m)
      if (shift_admissible(c, m)) ms.push_back(m);
    std::vector<char> ok(seeds * ms.size(), 1);
    parallel_for(ok.size(), jobs, [&](std::size_t i) {
      const std::size_t r = i / ms.size();
      ok[i] = shift_equivariance_check(c, ms[i % ms.size()], replica_seed(seed, 0x5f, r), horizon);
    });
    const auto bad = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 0));
    per[coupling_name(c)] = Json{{"shifts", ms}, {"seeds", seeds}, {"failures", bad}};
    all = all && bad == 0;
  }
  return Json{{"pass", all}, {"couplings", per}};
}

/// Runs the audits listed in audit.axioms (default: all five).
inline Json axiom_audit(const ExperimentConfig& cfg, std::size_t jobs = 1) {
  const auto seed = cfg.get<std::uint64_t>("seed", 1);
  std::vector<std::string> wanted;
  const std::string list = cfg.get<std::string>("audit.axioms", "");
  if (list.empty()) {
    wanted = audit_keys();
  } else {
    std::size_t pos = 0;
    while (pos <= list.size()) {
      auto end = list.find(',', pos);
      if (end == std::string::npos) end = list.size();
      std::string k = list.substr(pos, end - pos);
      k.erase(0, k.find_first_not_of(' '));
      k.erase(k.find_last_not_of(' ') + 1);
      if (std::find(audit_keys().begin(), audit_keys().end(), k) == audit_keys().end())
        throw std::invalid_argument("axiom_audit: unknown axiom key '" + k + "'");
      wanted.push_back(k);
      pos = end + 1;
    }
  }
  Json report{{"tool_version", kVersion}, {"config_hash", cfg.hash()}, {"seed", seed}};
  Json axioms = Json::object();
  bool all = true;
  for (const auto& k : wanted) {
    Json r;
    if (k == "triangle") r = audit_triangle(cfg, seed, jobs);
    else if (k == "independent_increments") r = audit_independent_increments(cfg, seed, jobs);
    else if (k == "marginals") r = audit_marginals(cfg, seed, jobs);
    else if (k == "monotonicity") r = audit_monotonicity(cfg, seed, jobs);
    else r = audit_shift(cfg, seed, jobs);
    all = all && r.at("pass").get<bool>();
    axioms[k] = std::move(r);
  }
  report["axioms"] = std::move(axioms);
  report["pass"] = all;
  return report;
}

}  // namespace kpzlab
