#pragma once

// Two-sample and one-sample distribution tests, Wasserstein-1, regression
// helpers and the tabulated Tracy-Widom GUE quantiles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kpzlab/random.hpp"

#ifndef KPZLAB_DATA_DIR
#define KPZLAB_DATA_DIR "data"
#endif

namespace kpzlab {

struct SampleSet {
  std::string label;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// c(alpha) of the asymptotic two-sample KS threshold.
inline double ks_critical_value(double alpha) {
  if (alpha == 0.01) return 1.628;
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ks_critical_value: alpha outside (0,1)");
  return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

struct KsResult {
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = true;  // statistic <= threshold
};

/// sup |F_A - F_B| with threshold c(alpha) sqrt((n+m)/(nm)).
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha = 0.01) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  KsResult r;
  r.statistic = d;
  r.threshold = ks_critical_value(alpha) * std::sqrt((n + m) / (n * m));
  r.pass = d <= r.threshold;
  return r;
}

inline KsResult ks_two_sample(const SampleSet& a, const SampleSet& b, double alpha = 0.01) {
  return ks_two_sample(a.values, b.values, alpha);
}

inline double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("wasserstein1: sample sizes differ");
  if (a.empty()) throw std::invalid_argument("wasserstein1: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return v.size() > 1 ? s / static_cast<double>(v.size() - 1) : 0.0;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("pearson: need paired samples");
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares: need >= 2 points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx);
  }
  return f;
}

/// Empirical tail P[Y > m] for m = 0..max.
inline std::vector<double> exceedance_curve(const std::vector<std::int64_t>& ys) {
  if (ys.empty()) throw std::invalid_argument("exceedance_curve: empty sample");
  const auto mx = std::max<std::int64_t>(0, *std::max_element(ys.begin(), ys.end()));
  std::vector<double> out(static_cast<std::size_t>(mx + 1), 0.0);
  for (std::int64_t m = 0; m <= mx; ++m) {
    std::size_t c = 0;
    for (auto y : ys) c += y > m ? 1 : 0;
    out[static_cast<std::size_t>(m)] = static_cast<double>(c) / static_cast<double>(ys.size());
  }
  return out;
}

/// The tail up to its first zero entry, with that entry replaced by the
/// one-sided upper confidence bound -ln(alpha)/n for an unobserved event.
inline std::vector<double> censored_tail(const std::vector<double>& tail, std::size_t n, double alpha = 0.01) {
  std::vector<double> out;
  for (double v : tail) {
    if (v > 0.0) {
      out.push_back(v);
      continue;
    }
    out.push_back(-std::log(alpha) / static_cast<double>(n));
    break;
  }
  if (out.size() == tail.size()) out.push_back(-std::log(alpha) / static_cast<double>(n));
  return out;
}

/// C e^{-c m} fitted by least squares to log tail[m] for m in [m_lo, m_hi]
/// (zero entries skipped); C is then raised so the envelope dominates there.
struct ExponentialEnvelope {
  double C = 0.0;
  double rate = 0.0;  // c; decay requires c > 0
  double operator()(double m) const { return C * std::exp(-rate * m); }
};

inline ExponentialEnvelope fit_exponential_envelope(const std::vector<double>& tail, std::size_t m_lo,
                                                    std::size_t m_hi) {
  std::vector<double> xs, ys;
  for (std::size_t m = m_lo; m <= m_hi && m < tail.size(); ++m)
    if (tail[m] > 0.0) {
      xs.push_back(static_cast<double>(m));
      ys.push_back(std::log(tail[m]));
    }
  if (xs.size() < 2) throw std::invalid_argument("fit_exponential_envelope: fewer than two positive points");
  const LinearFit f = least_squares(xs, ys);
  ExponentialEnvelope e{std::exp(f.intercept), -f.slope};
  for (std::size_t i = 0; i < xs.size(); ++i) e.C = std::max(e.C, std::exp(ys[i] + e.rate * xs[i]));
  return e;
}

// ---------------------------------------------------------------------------
// Tabulated one-point law
// ---------------------------------------------------------------------------

class QuantileTable {
 public:
  QuantileTable() = default;
  QuantileTable(std::vector<double> levels, std::vector<double> quantiles, double mean, double variance)
      : levels_(std::move(levels)), quantiles_(std::move(quantiles)), mean_(mean), variance_(variance) {
    validate();
  }

  /// CSV with '#' comment lines; "# mean,<v>" and "# variance,<v>" are read,
  /// then a "level,quantile" header and one row per level.
  static QuantileTable parse(std::istream& is) {
    std::vector<double> lv, qv;
    double m = 0.0, var = 0.0;
    bool have_mean = false, have_var = false, header = false;
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        const auto comma = line.find(',');
        std::string key = line.substr(1, comma == std::string::npos ? std::string::npos : comma - 1);
        key.erase(0, key.find_first_not_of(' '));
        if (comma != std::string::npos && key == "mean") {
          m = std::stod(line.substr(comma + 1));
          have_mean = true;
        } else if (comma != std::string::npos && key == "variance") {
          var = std::stod(line.substr(comma + 1));
          have_var = true;
        }
        continue;
      }
      if (!header) {
        if (line.rfind("level,quantile", 0) != 0) throw std::invalid_argument("QuantileTable: missing header");
        header = true;
        continue;
      }
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("QuantileTable: bad row");
      lv.push_back(std::stod(line.substr(0, comma)));
      qv.push_back(std::stod(line.substr(comma + 1)));
    }
    if (!have_mean || !have_var) throw std::invalid_argument("QuantileTable: mean/variance entries missing");
    return QuantileTable(std::move(lv), std::move(qv), m, var);
  }

  static QuantileTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("QuantileTable: cannot open " + path);
    return parse(in);
  }

  const std::vector<double>& levels() const noexcept { return levels_; }
  const std::vector<double>& quantiles() const noexcept { return quantiles_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }
  bool empty() const noexcept { return levels_.empty(); }

  /// Piecewise-linear quantile function, extended linearly beyond the table.
  double quantile(double u) const {
    if (empty()) throw std::logic_error("QuantileTable: empty table");
    auto it = std::upper_bound(levels_.begin(), levels_.end(), u);
    std::size_t k = static_cast<std::size_t>(it - levels_.begin());
    k = std::clamp<std::size_t>(k, 1, levels_.size() - 1);
    const double l0 = levels_[k - 1], l1 = levels_[k];
    return quantiles_[k - 1] + (u - l0) / (l1 - l0) * (quantiles_[k] - quantiles_[k - 1]);
  }

  /// Inverse of quantile(), clamped to [0, 1].
  double cdf(double x) const {
    if (empty()) throw std::logic_error("QuantileTable: empty table");
    auto it = std::upper_bound(quantiles_.begin(), quantiles_.end(), x);
    std::size_t k = static_cast<std::size_t>(it - quantiles_.begin());
    k = std::clamp<std::size_t>(k, 1, quantiles_.size() - 1);
    const double q0 = quantiles_[k - 1], q1 = quantiles_[k];
    return std::clamp(levels_[k - 1] + (x - q0) / (q1 - q0) * (levels_[k] - levels_[k - 1]), 0.0, 1.0);
  }

  double sample(CounterRng& rng) const { return quantile(rng.uniform()); }

 private:
  void validate() const {
    if (levels_.size() != quantiles_.size()) throw std::invalid_argument("QuantileTable: column lengths differ");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      if (!(levels_[i] > 0.0 && levels_[i] < 1.0)) throw std::invalid_argument("QuantileTable: level outside (0,1)");
      if (i > 0 && !(levels_[i] > levels_[i - 1])) throw std::invalid_argument("QuantileTable: levels not increasing");
      if (i > 0 && !(quantiles_[i] > quantiles_[i - 1]))
        throw std::invalid_argument("QuantileTable: quantiles not increasing");
    }
  }

  std::vector<double> levels_, quantiles_;
  double mean_ = 0.0, variance_ = 0.0;
};

inline std::string data_path(const std::string& file) {
  if (const char* env = std::getenv("KPZLAB_DATA")) return std::string(env) + "/" + file;
  return std::string(KPZLAB_DATA_DIR) + "/" + file;
}

inline const QuantileTable& tw_gue_table() {
  static const QuantileTable t = QuantileTable::load(data_path("tw_gue_quantiles.csv"));
  return t;
}

/// One-sample KS distance sup_x |F_n(x) - F(x)| against the interpolated
/// table law; both one-sided limits are taken at every sample atom.
inline double ks_against_table(std::vector<double> a, const QuantileTable& t) {
  if (t.empty()) throw std::invalid_argument("ks_against_table: empty table");
  if (a.empty()) throw std::invalid_argument("ks_against_table: empty sample");
  std::sort(a.begin(), a.end());
  const auto n = static_cast<double>(a.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < a.size()) {
    std::size_t j = i;
    while (j < a.size() && a[j] == a[i]) ++j;
    const double f = t.cdf(a[i]);
    d = std::max({d, std::abs(static_cast<double>(i) / n - f), std::abs(static_cast<double>(j) / n - f)});
    i = j;
  }
  return d;
}

/// Fraction of `runs` same-law pairs of size n rejected by ks_two_sample.
inline double ks_null_rejection_rate(std::size_t runs, std::size_t n, std::uint64_t seed, double alpha = 0.01) {
  std::size_t rejected = 0;
  for (std::size_t r = 0; r < runs; ++r) {
    CounterRng rng(hash_words(seed, {0x4e55, r}));
    std::vector<double> a(n), b(n);
    for (auto& x : a) x = rng.normal(0.0, 1.0);
    for (auto& x : b) x = rng.normal(0.0, 1.0);
    if (!ks_two_sample(a, b, alpha).pass) ++rejected;
  }
  return static_cast<double>(rejected) / static_cast<double>(runs);
}

}  // namespace kpzlab
