#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kpzlab/kpzlab.hpp"

using namespace kpzlab;

namespace {

struct Global {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  std::string table;
  std::string format = "csv";
  std::size_t jobs = 1;
};

// Effective parameters: command line, then config file, then default. Every
// resolved value is written back so the config hash covers the whole run.
class Params {
 public:
  ExperimentConfig cfg;

  template <class T>
  T take(const std::string& key, const std::optional<T>& cli, const T& fallback) {
    const T v = cli ? *cli : cfg.get<T>(key, fallback);
    cfg.set(key, v);
    return v;
  }
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
};

struct Result {
  Table table;
  std::optional<Json> report;
  bool pass = true;
};

Json cell(double v) { return is_neg_inf(v) ? Json("-inf") : Json(v); }
Json cell(ExtInt v) { return v.is_finite() ? Json(v.value()) : Json("-inf"); }

std::string csv_cell(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_float()) return format_value(j.get<double>());
  return j.dump();
}

void write_table(std::ostream& os, const Table& t, const std::string& format, const Json& header) {
  if (format == "json") {
    Json doc = header;
    doc["columns"] = t.columns;
    Json rows = Json::array();
    for (const auto& r : t.rows) {
      Json o = Json::object();
      for (std::size_t i = 0; i < r.size(); ++i) o[t.columns[i]] = r[i];
      rows.push_back(std::move(o));
    }
    doc["rows"] = std::move(rows);
    os << doc.dump(2) << '\n';
    return;
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
    os << '\n';
  }
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  fn(os);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> v;
  for (const auto& x : split(s, ',')) v.push_back(std::stod(x));
  return v;
}

// "lo:hi" or a half-width N meaning [-N, N].
TasepWindow parse_window(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    const Site n = std::stoll(s);
    return {-n, n};
  }
  return {std::stoll(s.substr(0, colon)), std::stoll(s.substr(colon + 1))};
}

// "x:t,x:t,..."
std::vector<std::pair<double, double>> parse_points(const std::string& s) {
  std::vector<std::pair<double, double>> out;
  for (const auto& item : split(s, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("expected x:t, got " + item);
    out.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
  }
  return out;
}

// Lines "v rate" or "v,rate"; '#' starts a comment.
std::map<std::int64_t, double> read_rates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rate table " + path);
  std::map<std::int64_t, double> rates;
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream is(line);
    std::int64_t v;
    double r;
    if (is >> v >> r) rates[v] = r;
  }
  return rates;
}

std::string rates_string(const std::map<std::int64_t, double>& rates) {
  std::string s;
  for (const auto& [v, r] : rates) s += (s.empty() ? "" : ",") + std::to_string(v) + ":" + format_value(r);
  return s;
}

std::map<std::int64_t, double> parse_rates_string(const std::string& s) {
  std::map<std::int64_t, double> rates;
  for (const auto& item : split(s, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("expected v:rate, got " + item);
    rates[std::stoll(item.substr(0, colon))] = std::stod(item.substr(colon + 1));
  }
  return rates;
}

// The rate table is stored in the config by value, so the hash tracks the
// rates and not the file name.
JumpDistribution resolve_rates(Params& P, const std::string& key, const std::optional<std::string>& file) {
  std::optional<std::string> cli;
  if (file) cli = rates_string(read_rates(*file));
  const auto rates = parse_rates_string(P.take<std::string>(key, cli, "1:1"));
  std::int64_t K = 0;
  for (const auto& [v, r] : rates) K = std::max({K, std::abs(v), static_cast<std::int64_t>(std::ceil(r))});
  return JumpDistribution(rates, K);
}

HeightFunction initial_condition(const std::string& spec, Site lo, Site hi) {
  std::istringstream is(spec);
  std::string kind;
  is >> kind;
  if (kind == "wedge") {
    Site x0 = 0;
    is >> x0;
    return narrow_wedge(x0, lo, hi);
  }
  if (kind == "twowedge") {
    Site a = 0, b = 0;
    is >> a >> b;
    const auto f = narrow_wedge(a, lo, hi), g = narrow_wedge(b, lo, hi);
    std::vector<Height> v;
    for (Site x = lo; x <= hi; ++x) v.push_back(std::max(f(x), g(x)));
    return HeightFunction(lo, std::move(v));
  }
  if (kind == "sawtooth" || kind == "flat") {
    std::vector<Height> v;
    for (Site x = lo; x <= hi; ++x) v.push_back(is_even(x) ? 0 : 1);
    return HeightFunction(lo, std::move(v));
  }
  if (kind == "walk") {
    std::uint64_t s = 0;
    is >> s;
    CounterRng rng(s);
    return sample_walk(rng, lo, hi);
  }
  if (kind == "heights") {
    std::vector<Height> v;
    Height h;
    while (is >> h) v.push_back(h);
    if (static_cast<Site>(v.size()) != hi - lo + 1) throw std::invalid_argument("heights: length does not match the window");
    return HeightFunction(lo, std::move(v));
  }
  throw std::invalid_argument("unknown initial condition '" + spec + "'");
}

std::vector<std::string> read_copy_specs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open copies file " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    line.erase(0, line.find_first_not_of(" \t"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

// One column of numbers from a file: plain numbers, or a CSV whose first line
// is a header (the named column, else the last one).
std::vector<double> read_sample(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file " + path);
  std::vector<double> out;
  std::string line;
  std::optional<std::size_t> col;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, ',');
    if (fields.empty()) continue;
    if (first) {
      first = false;
      char* end = nullptr;
      std::strtod(fields.back().c_str(), &end);
      if (*end != '\0') {
        col = fields.size() - 1;
        if (!column.empty()) {
          const auto it = std::find(fields.begin(), fields.end(), column);
          if (it == fields.end()) throw std::invalid_argument("column " + column + " not found in " + path);
          col = static_cast<std::size_t>(it - fields.begin());
        }
        continue;
      }
    }
    const std::size_t c = col.value_or(fields.size() - 1);
    if (c >= fields.size()) throw std::invalid_argument("short row in " + path);
    out.push_back(std::stod(fields[c]));
  }
  return out;
}

Json ks_json(const KsResult& r) {
  return Json{{"statistic", r.statistic}, {"threshold", r.threshold}, {"pass", r.pass}};
}

// Up to n sites spread over the certified part of w after time t.
std::vector<Site> certified_sites(TasepWindow w, double t, std::size_t n) {
  const auto cert = certified_region(w.lo, w.hi, 1, t);
  if (cert.empty()) throw std::invalid_argument("window too small for the horizon");
  std::vector<Site> xs;
  const Site span = cert.hi - cert.lo;
  for (std::size_t i = 0; i < n; ++i) {
    const Site x = cert.lo + (n > 1 ? span * static_cast<Site>(i) / static_cast<Site>(n - 1) : span / 2);
    if (xs.empty() || xs.back() != x) xs.push_back(x);
  }
  return xs;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::optional<std::string> model, p_file, window, copies, orientation;
  std::optional<std::int64_t> a, b;
  std::optional<double> horizon;
  std::optional<std::size_t> snapshots;
  std::string event_log;
};

Result run_simulate(Params& P, std::uint64_t seed, const SimulateArgs& A) {
  const auto model = P.take<std::string>("simulate.model", A.model, "aep-basic");
  const auto p = resolve_rates(P, "simulate.rates", A.p_file);
  const auto w = parse_window(P.take<std::string>("simulate.window", A.window, "-20:20"));
  const double T = P.take<double>("simulate.horizon", A.horizon, 4.0);
  const auto snaps = P.take<std::size_t>("simulate.snapshots", A.snapshots, 4);
  std::optional<std::string> copies_cli;
  if (A.copies) {
    std::string joined;
    for (const auto& s : read_copy_specs(*A.copies)) joined += (joined.empty() ? "" : ";") + s;
    copies_cli = joined;
  }
  const auto specs = split(P.take<std::string>("simulate.copies", copies_cli, "wedge 0"), ';');
  std::vector<HeightFunction> copies;
  for (const auto& s : specs) copies.push_back(initial_condition(s, w.lo, w.hi));
  if (snaps == 0) throw std::invalid_argument("simulate: snapshots must be positive");

  CoupledEnsemble ens(copies, ClockField(seed, T));
  ens.set_logging(false);
  std::optional<ExoticEngine> exotic;
  std::optional<BasicEngine> basic;
  if (model == "asep-exotic") {
    const ExoticCoupling c{P.take<std::int64_t>("simulate.a", A.a, 1), P.take<std::int64_t>("simulate.b", A.b, 1)};
    const auto orient = P.take<std::string>("simulate.rate_orientation", A.orientation, "standard");
    if (orient != "standard" && orient != "literal") throw std::invalid_argument("rate orientation must be standard or literal");
    if (!p.nearest_neighbour()) throw std::invalid_argument("asep-exotic needs a nearest-neighbour rate table");
    exotic.emplace(ens, c, p.rate(1), p.rate(-1),
                   orient == "literal" ? RateOrientation::Literal : RateOrientation::Standard);
  } else if (model == "aep-basic") {
    basic.emplace(ens, p);
  } else {
    throw std::invalid_argument("unknown model " + model);
  }

  Result res;
  res.table.columns = {"time", "copy", "site", "height"};
  for (std::size_t k = 0; k <= snaps; ++k) {
    const double t = T * static_cast<double>(k) / static_cast<double>(snaps);
    if (exotic) exotic->advance(t);
    else basic->advance(t);
    for (std::size_t c = 0; c < ens.size(); ++c)
      for (Site x = ens.lo(); x <= ens.hi(); ++x) res.table.rows.push_back({cell(t), c, x, ens.height(c, x)});
  }
  if (!A.event_log.empty()) with_output(A.event_log, [&](std::ostream& os) { ens.clock().write_event_log(os); });
  return res;
}

// ---------------------------------------------------------------------------

struct MetricArgs {
  std::optional<std::string> window, sources, targets, audit;
  std::optional<double> horizon, epsilon, alpha;
  std::optional<std::size_t> replicas;
};

Result run_metric(Params& P, std::uint64_t seed, std::size_t jobs, const MetricArgs& A) {
  const auto w = parse_window(P.take<std::string>("metric.window", A.window, "-20:20"));
  w.validate();
  const double T = P.take<double>("metric.horizon", A.horizon, 4.0);
  const double eps = P.take<double>("metric.epsilon", A.epsilon, 0.0);
  const auto audit = P.take<std::string>("metric.audit", A.audit, "");
  Result res;

  if (audit.empty()) {
    const auto src = parse_points(P.take<std::string>("metric.sources", A.sources, "0:0"));
    std::string dflt;
    for (Site y = -4; y <= 4; ++y) dflt += (dflt.empty() ? "" : ",") + std::to_string(y) + ":" + format_value(T);
    const auto dst = parse_points(P.take<std::string>("metric.targets", A.targets, dflt));
    res.table.columns = {"x", "s", "y", "t", "d"};
    if (eps > 0.0) {
      double lat_T = 0.0;
      for (const auto& [y, t] : dst) lat_T = std::max(lat_T, lattice_point(y, t, eps).t);
      const ClockField clock(seed, lat_T);
      for (const auto& [x, s] : src)
        for (const auto& [y, t] : dst)
          res.table.rows.push_back({cell(x), cell(s), cell(y), cell(t), cell(scaled_dpi(clock, eps, x, s, y, t))});
      return res;
    }
    std::vector<SpaceTime> a, b;
    for (const auto& [x, s] : src) a.push_back({static_cast<Site>(x), s});
    for (const auto& [y, t] : dst) b.push_back({static_cast<Site>(y), t});
    const auto g = dpi_by_evolution(ClockField(seed, T), w, a, b);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j)
        res.table.rows.push_back({a[i].x, cell(a[i].t), b[j].x, cell(b[j].t), cell(g.at(i, j))});
    return res;
  }

  const auto n = P.take<std::size_t>("metric.replicas", A.replicas, 100);
  Json rep{{"audit", audit}, {"replicas", n}};
  if (audit == "triangle") {
    const auto xs = certified_sites(w, T, 5);
    const std::vector<double> times{0.0, T / 3.0, 2.0 * T / 3.0, T};
    std::vector<TriangleReport> reps(n);
    parallel_for(n, jobs, [&](std::size_t r) {
      std::vector<SpaceTime> src, dst;
      for (double t : times)
        for (Site x : xs) {
          if (t < T) src.push_back({x, t});
          if (t > 0.0) dst.push_back({x, t});
        }
      reps[r] = triangle_audit(dpi_by_evolution(ClockField(replica_seed(seed, 0x71, r), T), w, src, dst));
    });
    std::size_t chains = 0, bad = 0;
    std::int64_t worst = 0;
    for (const auto& r : reps) {
      chains += r.chains;
      bad += r.violations;
      worst = std::max(worst, r.worst_excess);
    }
    rep["chains"] = chains;
    rep["violations"] = bad;
    rep["worst_excess"] = worst;
    res.pass = bad == 0;
  } else if (audit == "variational") {
    const Site c0 = is_even(w.lo + w.hi) ? (w.lo + w.hi) / 2 : (w.lo + w.hi - 1) / 2;
    const Site mid = is_even(c0) ? c0 : c0 - 1;
    std::vector<HeightFunction> ics{narrow_wedge(mid, w.lo, w.hi), initial_condition("sawtooth", w.lo, w.hi),
                                    initial_condition("twowedge " + std::to_string(mid - 4) + " " + std::to_string(mid + 4), w.lo, w.hi)};
    std::vector<std::size_t> checked(n), failed(n);
    parallel_for(n, jobs, [&](std::size_t r) {
      const ClockField clock(replica_seed(seed, 0x7a, r), T);
      for (const auto& h0 : ics) {
        const auto v = variational_check(clock, h0, 0.0, T);
        checked[r] += v.sites_checked;
        failed[r] += v.ok ? 0 : 1;
      }
    });
    std::size_t sites = 0, bad = 0;
    for (std::size_t r = 0; r < n; ++r) {
      sites += checked[r];
      bad += failed[r];
    }
    rep["initial_conditions"] = ics.size();
    rep["sites_checked"] = sites;
    rep["failures"] = bad;
    res.pass = bad == 0;
  } else if (audit == "composition") {
    std::vector<char> ok(n, 1);
    parallel_for(n, jobs, [&](std::size_t r) {
      const ClockField clock(replica_seed(seed, 0x7c, r), T);
      ok[r] = diamond(metric_kernel(clock, w, 0.0, T / 2.0), metric_kernel(clock, w, T / 2.0, T)) ==
              metric_kernel(clock, w, 0.0, T);
    });
    const auto bad = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 0));
    rep["failures"] = bad;
    res.pass = bad == 0;
  } else if (audit == "symmetry") {
    const double alpha = P.take<double>("metric.alpha", A.alpha, 0.01);
    const auto dst = parse_points(P.take<std::string>("metric.targets", A.targets, "3:" + format_value(T)));
    Json tests = Json::array();
    for (const auto& [y, t] : dst) {
      const Site ys = static_cast<Site>(y);
      std::vector<double> right(n), left(n);
      parallel_for(n, jobs, [&](std::size_t r) {
        right[r] = dpi(ClockField(replica_seed(seed, 0x73, r), t), w, {0, 0.0}, {ys, t}).as_double();
        left[r] = dpi(ClockField(replica_seed(seed, 0x74, r), t), w, {0, 0.0}, {-ys, t}).as_double();
      });
      const auto ks = ks_two_sample(right, left, alpha);
      Json j = ks_json(ks);
      j["y"] = ys;
      j["t"] = t;
      tests.push_back(std::move(j));
      res.pass = res.pass && ks.pass;
    }
    rep["alpha"] = alpha;
    rep["tests"] = std::move(tests);
  } else {
    throw std::invalid_argument("unknown metric audit " + audit);
  }
  rep["pass"] = res.pass;
  res.report = std::move(rep);
  return res;
}

// ---------------------------------------------------------------------------

struct MultitypeArgs {
  std::optional<std::string> p_file, quantity;
  std::optional<std::int64_t> window, w, margin;
  std::optional<double> horizon, t;
  std::optional<std::size_t> replicas;
};

Result run_multitype(Params& P, std::uint64_t seed, std::size_t jobs, const MultitypeArgs& A) {
  const auto p = resolve_rates(P, "multitype.rates", A.p_file);
  const auto quantity = P.take<std::string>("multitype.quantity", A.quantity, "takeovers");
  const auto n = P.take<std::size_t>("multitype.replicas", A.replicas, 10);
  const auto margin = P.take<std::int64_t>("multitype.margin", A.margin, 8);
  Result res;
  if (quantity == "takeovers") {
    MultitypeRunParams rp;
    rp.box = P.take<std::int64_t>("multitype.window", A.window, 20);
    rp.horizon = P.take<double>("multitype.horizon", A.horizon, 4.0);
    rp.margin = margin;
    std::vector<std::vector<std::uint32_t>> counts(n);
    parallel_for(n, jobs, [&](std::size_t r) { counts[r] = takeover_counts(p, rp, replica_seed(seed, 0x7a11, r)); });
    res.table.columns = {"replica", "label", "takeovers"};
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t l = 0; l < counts[r].size(); ++l) res.table.rows.push_back({r, l, counts[r][l]});
  } else if (quantity == "y") {
    const double t = P.take<double>("multitype.t", A.t, 4.0);
    const Site w = P.take<std::int64_t>("multitype.w", A.w, 5);
    std::vector<std::int64_t> ys(n);
    parallel_for(n, jobs, [&](std::size_t r) { ys[r] = y_sample(p, t, w, replica_seed(seed, 0x7e, r), margin); });
    res.table.columns = {"replica", "t", "w", "Y"};
    for (std::size_t r = 0; r < n; ++r) res.table.rows.push_back({r, cell(t), w, ys[r]});
  } else {
    throw std::invalid_argument("multitype: quantity must be takeovers or y");
  }
  return res;
}

// ---------------------------------------------------------------------------

struct WebArgs {
  std::optional<double> eta, delta;
  std::optional<std::string> n, points, audit;
  std::optional<std::int64_t> box;
  std::optional<std::size_t> replicas;
};

Result run_webdist(Params& P, std::uint64_t seed, std::size_t jobs, const WebArgs& A) {
  const double eta = P.take<double>("webdist.eta", A.eta, 0.6);
  const auto ns = parse_doubles(P.take<std::string>("webdist.n", A.n, "250"));
  const auto reps = P.take<std::size_t>("webdist.replicas", A.replicas, 10);
  const auto audit = P.take<std::string>("webdist.audit", A.audit, "");
  if (ns.empty()) throw std::invalid_argument("webdist: --n needs at least one value");
  const auto k = web_constants(eta);
  Result res;

  if (audit.empty()) {
    std::vector<std::array<double, 4>> pts;
    for (const auto& item : split(P.take<std::string>("webdist.points", A.points, "0:0:0:1"), ',')) {
      const auto f = split(item, ':');
      if (f.size() != 4) throw std::invalid_argument("webdist: points are x:s:y:t, got " + item);
      pts.push_back({std::stod(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3])});
    }
    std::vector<std::vector<double>> vals(reps);
    parallel_for(reps, jobs, [&](std::size_t r) {
      const RademacherField field(replica_seed(seed, 0x3e, r));
      for (const auto& q : pts) vals[r].push_back(rescale_m_eta(field, k, ns.front(), q[0], q[1], q[2], q[3]));
    });
    res.table.columns = {"replica", "x", "s", "y", "t", "value"};
    for (std::size_t r = 0; r < reps; ++r)
      for (std::size_t i = 0; i < pts.size(); ++i)
        res.table.rows.push_back({r, cell(pts[i][0]), cell(pts[i][1]), cell(pts[i][2]), cell(pts[i][3]), cell(vals[r][i])});
    return res;
  }

  Json rep{{"audit", audit}, {"replicas", reps}};
  if (audit == "oracle" || audit == "lightcone") {
    const auto B = P.take<std::int64_t>("webdist.box", A.box, 8);
    if (B < 1 || B > 10) throw std::invalid_argument("webdist: oracle box must be between 1 and 10");
    std::vector<std::size_t> checked(reps), bad(reps);
    parallel_for(reps, jobs, [&](std::size_t r) {
      RademacherField f(replica_seed(seed, 0x3f, r));
      const std::int64_t n_lo = audit == "lightcone" ? -B : 0;
      f.set_box(-B, B, n_lo, B);
      for (std::int64_t m = n_lo; m <= B; ++m)
        for (std::int64_t j = -B; j <= B; ++j) {
          if (!is_even(j + m)) continue;
          const auto d = drw(f, {0, 0}, {j, m});
          bool ok;
          if (audit == "oracle") ok = m < 0 || d == drw_bruteforce(f, {0, 0}, {j, m});
          else ok = d.is_finite() == (m >= 0 && std::abs(j) <= m);
          ++checked[r];
          bad[r] += ok ? 0 : 1;
        }
    });
    std::size_t total = 0, mism = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      total += checked[r];
      mism += bad[r];
    }
    rep["box"] = B;
    rep["pairs_checked"] = total;
    rep["mismatches"] = mism;
    res.pass = mism == 0;
  } else if (audit == "slack") {
    const double delta = P.take<double>("webdist.delta", A.delta, 0.2);
    Json rows = Json::array();
    std::vector<double> rates(ns.size());
    parallel_for(ns.size(), jobs, [&](std::size_t i) {
      rates[i] = soft_triangle_slack(eta, ns[i], reps, replica_seed(seed, 0x5ac, i), delta).rate();
    });
    for (std::size_t i = 0; i < ns.size(); ++i) {
      rows.push_back(Json{{"n", ns[i]}, {"violation_rate", rates[i]}});
      if (i > 0 && rates[i] > rates[i - 1]) res.pass = false;
    }
    rep["delta"] = delta;
    rep["rates"] = std::move(rows);
  } else {
    throw std::invalid_argument("unknown webdist audit " + audit);
  }
  rep["pass"] = res.pass;
  res.report = std::move(rep);
  return res;
}

// ---------------------------------------------------------------------------

struct HorizonArgs {
  std::optional<std::size_t> k, replicas;
  std::optional<std::string> drifts, grid, embedding;
  std::optional<double> epsilon, dt, alpha;
};

Result run_horizon(Params& P, std::uint64_t seed, bool want_table, const HorizonArgs& A) {
  StarParams sp;
  const auto k = P.take<std::size_t>("horizon.k", A.k, 2);
  sp.drifts = parse_doubles(P.take<std::string>("horizon.drifts", A.drifts, "1,2"));
  if (sp.drifts.size() != k) throw std::invalid_argument("horizon: --k does not match the number of drifts");
  sp.increments = parse_doubles(P.take<std::string>("horizon.grid", A.grid, "-1,-0.5,-0.25,0.25,0.5,1"));
  sp.eps = P.take<double>("horizon.epsilon", A.epsilon, 0.1);
  sp.dt = P.take<double>("horizon.dt", A.dt, 0.5);
  sp.replicas = P.take<std::size_t>("horizon.replicas", A.replicas, 500);
  sp.alpha = P.take<double>("horizon.alpha", A.alpha, 0.01);
  const auto emb = P.take<std::string>("horizon.embedding", A.embedding, "bernoulli");
  if (emb == "bernoulli") sp.embedding = HorizonEmbedding::BernoulliQueue;
  else if (emb == "gaussian") sp.embedding = HorizonEmbedding::GaussianEnvelope;
  else throw std::invalid_argument("horizon: embedding must be bernoulli or gaussian");
  sp.seed = seed;

  const auto star = property_star_test(sp);
  Result res;
  res.pass = star.ok();
  Json tests = Json::array();
  for (const auto& t : star.tests) {
    Json j = ks_json(t.ks);
    j["quantity"] = t.quantity;
    j["dx"] = t.dx;
    tests.push_back(std::move(j));
  }
  res.report = Json{{"embedding", emb}, {"epsilon", sp.eps}, {"dt", sp.dt}, {"replicas", sp.replicas},
                    {"drifts", sp.drifts}, {"slopes", star.slopes}, {"slopes_ok", star.slopes_ok},
                    {"ks_ok", star.ks_ok}, {"tests", std::move(tests)}, {"pass", res.pass}};
  if (want_table) {
    res.table.columns = {"replica", "line", "dx", "before", "after"};
    for (std::size_t r = 0; r < sp.replicas; ++r) {
      const auto [b, a] = star_replica(sp, r, sp.increments);
      for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t q = 0; q < sp.increments.size(); ++q)
          res.table.rows.push_back({r, i + 1, cell(sp.increments[q]), cell(b[i][q]), cell(a[i][q])});
    }
  }
  return res;
}

// ---------------------------------------------------------------------------

struct StatsArgs {
  std::string mode;
  std::string a, b, column;
  std::optional<double> alpha, ks_max;
  std::optional<std::size_t> runs, n;
};

Result run_stats(Params& P, std::uint64_t seed, const StatsArgs& A) {
  Result res;
  Json rep{{"mode", A.mode}};
  const double alpha = P.take<double>("stats.alpha", A.alpha, 0.01);
  auto need = [](const std::string& path, const char* flag) {
    if (path.empty()) throw std::invalid_argument(std::string("stats: ") + flag + " is required");
    return path;
  };
  if (A.mode == "ks") {
    const auto ks = ks_two_sample(read_sample(need(A.a, "--a"), A.column), read_sample(need(A.b, "--b"), A.column), alpha);
    rep.update(ks_json(ks));
    res.pass = ks.pass;
  } else if (A.mode == "table") {
    const auto s = read_sample(need(A.a, "--a"), A.column);
    const double ks_max = P.take<double>("stats.ks_max", A.ks_max, tolerances().get<double>("marginal.ks_max", 0.10));
    const double stat = ks_against_table(s, tw_gue_table());
    rep["statistic"] = stat;
    rep["ks_max"] = ks_max;
    rep["mean"] = mean(s);
    rep["table_mean"] = tw_gue_table().mean();
    res.pass = stat <= ks_max;
  } else if (A.mode == "wasserstein") {
    rep["distance"] = wasserstein1(read_sample(need(A.a, "--a"), A.column), read_sample(need(A.b, "--b"), A.column));
  } else if (A.mode == "calibrate") {
    const auto runs = P.take<std::size_t>("stats.runs", A.runs, 200);
    const auto n = P.take<std::size_t>("stats.n", A.n, 200);
    const double rate = ks_null_rejection_rate(runs, n, seed, alpha);
    rep["runs"] = runs;
    rep["n"] = n;
    rep["alpha"] = alpha;
    rep["rejection_rate"] = rate;
    res.pass = rate <= 2.0 * alpha;
  } else {
    throw std::invalid_argument("stats: mode must be ks, table, wasserstein or calibrate");
  }
  rep["pass"] = res.pass;
  res.report = std::move(rep);
  return res;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kpzlab: seeded simulations and audits for discrete KPZ models"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--config", g.config, "INI experiment config")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output path (default stdout)");
  app.add_option("--table", g.table, "also write the data table here when the main output is a report");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "evolve coupled exclusion processes");
  sim->add_option("--model", sa.model, "asep-exotic or aep-basic");
  sim->add_option("--a", sa.a);
  sim->add_option("--b", sa.b);
  sim->add_option("--p", sa.p_file, "rate table file (lines: v rate)")->check(CLI::ExistingFile);
  sim->add_option("--window", sa.window, "lo:hi or half-width");
  sim->add_option("--horizon", sa.horizon);
  sim->add_option("--copies", sa.copies, "initial condition per line")->check(CLI::ExistingFile);
  sim->add_option("--rate-orientation", sa.orientation, "standard or literal");
  sim->add_option("--snapshots", sa.snapshots, "number of snapshot intervals");
  sim->add_option("--event-log", sa.event_log, "write the clock events used (time,key,rate)");

  MetricArgs ma;
  auto* met = app.add_subcommand("metric", "TASEP directed metric");
  met->add_option("--window", ma.window);
  met->add_option("--horizon", ma.horizon);
  met->add_option("--sources", ma.sources, "x:s,...");
  met->add_option("--targets", ma.targets, "y:t,...");
  met->add_option("--epsilon", ma.epsilon, "read points in scaled coordinates");
  met->add_option("--audit", ma.audit, "triangle, variational, composition or symmetry");
  met->add_option("--replicas", ma.replicas);
  met->add_option("--alpha", ma.alpha);

  MultitypeArgs mt;
  auto* mul = app.add_subcommand("multitype", "multi-type label dynamics");
  mul->add_option("--p-table", mt.p_file)->check(CLI::ExistingFile);
  mul->add_option("--window", mt.window, "labels counted in [-window, window]");
  mul->add_option("--horizon", mt.horizon);
  mul->add_option("--replicas", mt.replicas);
  mul->add_option("--quantity", mt.quantity, "takeovers or y");
  mul->add_option("--t", mt.t);
  mul->add_option("--w", mt.w);
  mul->add_option("--margin", mt.margin);

  WebArgs wa;
  auto* web = app.add_subcommand("webdist", "random-walk web distances");
  web->add_option("--eta", wa.eta);
  web->add_option("--n", wa.n, "scale, or a comma list for --audit slack");
  web->add_option("--box", wa.box);
  web->add_option("--points", wa.points, "x:s:y:t,...");
  web->add_option("--replicas", wa.replicas);
  web->add_option("--audit", wa.audit, "oracle, slack or lightcone");
  web->add_option("--delta", wa.delta);

  HorizonArgs ha;
  auto* hor = app.add_subcommand("horizon", "stationary horizon increments under TASEP");
  hor->add_option("--k", ha.k);
  hor->add_option("--drifts", ha.drifts);
  hor->add_option("--grid", ha.grid, "increment offsets");
  hor->add_option("--epsilon", ha.epsilon);
  hor->add_option("--dt", ha.dt);
  hor->add_option("--replicas", ha.replicas);
  hor->add_option("--embedding", ha.embedding, "bernoulli or gaussian");
  hor->add_option("--alpha", ha.alpha);

  std::optional<std::string> axioms;
  auto* aud = app.add_subcommand("audit", "axiom audit");
  aud->add_option("--axioms", axioms, "comma list of audit keys");

  StatsArgs st;
  auto* sts = app.add_subcommand("stats", "statistical utilities");
  sts->add_option("mode", st.mode, "ks, table, wasserstein or calibrate")->required();
  sts->add_option("--a", st.a)->check(CLI::ExistingFile);
  sts->add_option("--b", st.b)->check(CLI::ExistingFile);
  sts->add_option("--column", st.column);
  sts->add_option("--alpha", st.alpha);
  sts->add_option("--ks-max", st.ks_max);
  sts->add_option("--runs", st.runs);
  sts->add_option("--n", st.n);

  CLI11_PARSE(app, argc, argv);

  try {
    Params P;
    if (!g.config.empty()) P.cfg = ExperimentConfig::load(g.config);
    const auto seed = P.take<std::uint64_t>("seed", g.seed, 1);
    Result res;
    bool report_primary = false;
    std::string command;
    if (sim->parsed()) {
      command = "simulate";
      res = run_simulate(P, seed, sa);
    } else if (met->parsed()) {
      command = "metric";
      res = run_metric(P, seed, g.jobs, ma);
    } else if (mul->parsed()) {
      command = "multitype";
      res = run_multitype(P, seed, g.jobs, mt);
    } else if (web->parsed()) {
      command = "webdist";
      res = run_webdist(P, seed, g.jobs, wa);
    } else if (hor->parsed()) {
      command = "horizon";
      res = run_horizon(P, seed, !g.table.empty(), ha);
    } else if (aud->parsed()) {
      command = "audit";
      if (axioms) P.cfg.set("audit.axioms", *axioms);
      const auto r = axiom_audit(P.cfg, g.jobs);
      res.pass = r.at("pass").get<bool>();
      res.report = r;
      report_primary = true;
    } else {
      command = "stats";
      res = run_stats(P, seed, st);
    }
    report_primary = report_primary || res.report.has_value();

    const Json header{{"tool_version", kVersion}, {"config_hash", P.cfg.hash()}, {"seed", seed}, {"command", command}};
    if (report_primary) {
      Json doc = header;
      for (auto& [key, value] : res.report->items()) doc[key] = value;
      with_output(g.out, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
      if (!g.table.empty() && !res.table.columns.empty())
        with_output(g.table, [&](std::ostream& os) { write_table(os, res.table, g.format, header); });
    } else {
      with_output(g.out, [&](std::ostream& os) { write_table(os, res.table, g.format, header); });
    }
    return res.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "kpzlab: " << e.what() << '\n';
    return 2;
  }
}
