#pragma once

// Pearson correlation with two-tailed p-values, Welch's t test, and the
// pairwise correlation driver. p-values come from Student's t distribution
// through the regularized incomplete beta function (Lentz continued
// fraction).

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "disclosure/error.hpp"

namespace disclosure::stats {

inline constexpr double kBetaEps = 1e-12;
inline constexpr int kBetaMaxIter = 300;

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz.
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kBetaMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kBetaEps) break;
  }
  return h;
}

// Stirling-series tail of log Gamma: lgamma(z) minus its leading terms.
inline double stirling_tail(double z) {
  const double z2 = z * z;
  return 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2) -
         1.0 / (1680.0 * z * z2 * z2 * z2);
}

// log Gamma(x + s) - log Gamma(x) for large x without cancellation.
inline double lgamma_ratio(double x, double s) {
  return (x - 0.5) * std::log1p(s / x) + s * std::log(x + s) - s + stirling_tail(x + s) -
         stirling_tail(x);
}

inline double log_beta(double a, double b) {
  const double big = std::max(a, b);
  const double small = std::min(a, b);
  if (big < 100.0) return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::lgamma(small) - lgamma_ratio(big, small);
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b). `xc` must equal 1 - x; passing it
// separately keeps precision when x is close to 1.
inline double incomplete_beta(double a, double b, double x, double xc) {
  if (x <= 0.0) return 0.0;
  if (xc <= 0.0) return 1.0;
  const double log_x = x < 0.5 ? std::log(x) : std::log1p(-xc);
  const double log_xc = xc < 0.5 ? std::log(xc) : std::log1p(-x);
  const double log_front = a * log_x + b * log_xc - detail::log_beta(a, b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_continued_fraction(b, a, xc) / b;
}

inline double incomplete_beta(double a, double b, double x) {
  return incomplete_beta(a, b, x, 1.0 - x);
}

// P(|T| >= |t|) for Student's t with df degrees of freedom.
inline double t_two_tailed(double t, double df) {
  if (!(df > 0.0)) throw InputError("degrees of freedom must be > 0");
  if (t == 0.0) return 1.0;
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t2), t2 / (df + t2));
}

inline double t_cdf(double t, double df) {
  if (!(df > 0.0)) throw InputError("degrees of freedom must be > 0");
  if (t == 0.0) return 0.5;
  const double tail = 0.5 * t_two_tailed(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

struct PairedSeries {
  std::string label_x;
  std::string label_y;
  std::vector<double> xs;
  std::vector<double> ys;

  std::size_t n() const { return xs.size(); }

  void validate() const {
    if (xs.size() != ys.size()) throw InputError("paired series of unequal length");
    if (xs.size() < 3) throw InputError("paired series needs n >= 3");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw InputError("non-finite value in series");
    }
  }
};

struct CorrelationResult {
  double r = 0.0;
  double t_stat = 0.0;
  double p_two_tailed = 1.0;
  std::size_t n = 0;
};

// Two-tailed p of a correlation coefficient r over n observations.
inline double correlation_p(double r, std::size_t n) {
  if (n < 3) throw InputError("correlation p-value needs n >= 3");
  if (std::fabs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  // With t^2 = df r^2 / (1 - r^2): df / (df + t^2) = 1 - r^2.
  const double r2 = r * r;
  return incomplete_beta(df / 2.0, 0.5, 1.0 - r2, r2);
}

inline CorrelationResult pearson(const PairedSeries& s) {
  s.validate();
  const double n = static_cast<double>(s.n());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < s.n(); ++i) {
    mx += s.xs[i];
    my += s.ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < s.n(); ++i) {
    const double dx = s.xs[i] - mx;
    const double dy = s.ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw InputError("degenerate series");
  CorrelationResult res;
  res.n = s.n();
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = n - 2.0;
  if (std::fabs(res.r) >= 1.0) {
    res.t_stat = std::copysign(std::numeric_limits<double>::infinity(), res.r);
    res.p_two_tailed = 0.0;
  } else {
    res.t_stat = res.r * std::sqrt(df / (1.0 - res.r * res.r));
    res.p_two_tailed = correlation_p(res.r, res.n);
  }
  return res;
}

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// Welch's unequal-variance t test; positive t means mean(a) > mean(b).
inline TTestResult welch_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw InputError("welch_t needs at least 2 values per group");
  auto moments = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, ss / static_cast<double>(v.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double qa = va / na;
  const double qb = vb / nb;
  const double se2 = qa + qb;
  TTestResult res;
  if (!(se2 > 0.0)) {
    if (ma == mb) throw InputError("degenerate: both groups constant and equal");
    res.t = std::copysign(std::numeric_limits<double>::infinity(), ma - mb);
    res.df = na + nb - 2.0;
    res.p = 0.0;
    return res;
  }
  res.t = (ma - mb) / std::sqrt(se2);
  res.df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  res.p = t_two_tailed(res.t, res.df);
  return res;
}

// A numeric column keyed by abstract id.
struct Column {
  std::string label;
  std::map<std::string, double> values;
};

struct PairwiseRow {
  std::string x_label;
  std::string y_label;
  CorrelationResult result;
};

struct PairwiseTable {
  std::vector<PairwiseRow> rows;
  std::vector<std::string> warnings;
};

// Pearson for every (x, y) column pair over the ids present in both.
inline PairwiseTable pairwise_table(const std::vector<Column>& xs, const std::vector<Column>& ys) {
  PairwiseTable out;
  for (const auto& x : xs) {
    for (const auto& y : ys) {
      PairedSeries s{x.label, y.label, {}, {}};
      for (const auto& [id, xv] : x.values) {
        if (auto it = y.values.find(id); it != y.values.end()) {
          s.xs.push_back(xv);
          s.ys.push_back(it->second);
        }
      }
      if (s.xs.size() < 3) {
        out.warnings.push_back(x.label + " x " + y.label + ": join has " + std::to_string(s.xs.size()) +
                               " rows (< 3), skipped");
        continue;
      }
      try {
        out.rows.push_back({x.label, y.label, pearson(s)});
      } catch (const InputError& e) {
        out.warnings.push_back(x.label + " x " + y.label + ": " + e.what() + ", skipped");
      }
    }
  }
  return out;
}

}  // namespace disclosure::stats
