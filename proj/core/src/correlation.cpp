#include "gower/correlation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "gower/error.hpp"
#include "gower/stats.hpp"

namespace gower {
namespace {

bool selected(Mask mask, std::size_t i) { return mask.empty() || mask[i] != 0; }

void check_sizes(std::size_t a, std::size_t b, Mask mask) {
  if (a != b || (!mask.empty() && mask.size() != a))
    throw Error("correlation inputs differ in length");
}

void compact(std::span<const double> x, std::span<const double> y, Mask mask,
             std::vector<double>& cx, std::vector<double>& cy) {
  cx.clear();
  cy.clear();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!selected(mask, i)) continue;
    cx.push_back(x[i]);
    cy.push_back(y[i]);
  }
}

// Sum of squared deviations at the level of rounding noise counts as zero.
bool negligible(double ss, std::size_t n, double scale) {
  const double noise = 1e-13 * scale;
  return ss <= static_cast<double>(n) * noise * noise;
}

std::optional<double> pearson_dense(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  double mx = 0.0, my = 0.0, ax = 0.0, ay = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
    ax = std::max(ax, std::fabs(x[i]));
    ay = std::max(ay, std::fabs(y[i]));
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (negligible(sxx, n, ax) || negligible(syy, n, ay)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct Groups {
  std::size_t n0 = 0, n1 = 0;
  double mean0 = 0.0, mean1 = 0.0;
};

Groups group_means(std::span<const double> v, std::span<const double> dt) {
  Groups g;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (dt[i] == 1.0) {
      ++g.n1;
      g.mean1 += v[i];
    } else {
      ++g.n0;
      g.mean0 += v[i];
    }
  }
  if (g.n0) g.mean0 /= static_cast<double>(g.n0);
  if (g.n1) g.mean1 /= static_cast<double>(g.n1);
  return g;
}

void require_dichotomy(std::span<const double> dt) {
  for (double v : dt)
    if (v != 0.0 && v != 1.0) throw Error("biserial estimators need a 0/1 variable");
}

// Sum of the h largest values; reorders `scratch`.
double top_sum(std::span<const double> v, std::size_t h, std::vector<double>& scratch) {
  scratch.assign(v.begin(), v.end());
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(h - 1),
                   scratch.end(), std::greater<>());
  return std::accumulate(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(h), 0.0);
}

std::optional<double> brogden_from_values(const Groups& g, std::span<const double> v,
                                          std::vector<double>& scratch, BrogdenOptions options) {
  const std::size_t m = g.n0 + g.n1;
  if (g.n0 == 0 || g.n1 == 0 || m < 2) return std::nullopt;
  const double share = options.split == BrogdenSplit::kGroupMeans
                           ? std::max(g.mean0, g.mean1)
                           : static_cast<double>(g.n1) / static_cast<double>(m);
  const double raw_h = std::floor(static_cast<double>(m) * share);
  const auto h = static_cast<std::size_t>(std::clamp(raw_h, 1.0, static_cast<double>(m - 1)));
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  const double upper = top_sum(v, h, scratch);
  const double top = upper / static_cast<double>(h);
  const double rest = (total - upper) / static_cast<double>(m - h);
  const double dh = top - rest;
  if (!(dh > 0.0)) return std::nullopt;
  const double r = (g.mean1 - g.mean0) / dh;
  return options.clip ? std::clamp(r, -1.0, 1.0) : r;
}

std::optional<double> rank_biserial_from_ranks(std::span<const double> ranks,
                                               std::span<const double> dt) {
  const auto g = group_means(ranks, dt);
  if (g.n0 == 0 || g.n1 == 0) return std::nullopt;
  return 2.0 * (g.mean1 - g.mean0) / static_cast<double>(g.n0 + g.n1);
}

std::optional<double> point_biserial_dense(std::span<const double> dwg, std::span<const double> dt) {
  const std::size_t m = dwg.size();
  const auto g = group_means(dwg, dt);
  if (g.n0 == 0 || g.n1 == 0 || m < 2) return std::nullopt;
  double mu = 0.0, scale = 0.0;
  for (double v : dwg) {
    mu += v;
    scale = std::max(scale, std::fabs(v));
  }
  mu /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : dwg) ss += (v - mu) * (v - mu);
  if (negligible(ss, m, scale)) return std::nullopt;
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  const double p1 = static_cast<double>(g.n1) / static_cast<double>(m);
  const double md = static_cast<double>(m);
  return std::clamp((g.mean1 - g.mean0) / sd * std::sqrt(md / (md - 1.0) * p1 * (1.0 - p1)), -1.0,
                    1.0);
}

}  // namespace

std::string_view mode_name(CorrelationMode mode) {
  switch (mode) {
    case CorrelationMode::kPearson: return "wPG";
    case CorrelationMode::kPearsonBiserial: return "wPbG";
    case CorrelationMode::kSpearman: return "wSG";
    case CorrelationMode::kSpearmanBiserial: return "wSbG";
  }
  return "?";
}

CorrelationMode parse_mode(std::string_view text) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  };
  const auto t = lower(text);
  for (auto m : {CorrelationMode::kPearson, CorrelationMode::kPearsonBiserial,
                 CorrelationMode::kSpearman, CorrelationMode::kSpearmanBiserial})
    if (lower(mode_name(m)) == t) return m;
  throw Error("unknown correlation mode '" + std::string(text) + "'");
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y, Mask mask) {
  check_sizes(x.size(), y.size(), mask);
  if (mask.empty()) return pearson_dense(x, y);
  std::vector<double> cx, cy;
  compact(x, y, mask, cx, cy);
  return pearson_dense(cx, cy);
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y, Mask mask) {
  check_sizes(x.size(), y.size(), mask);
  std::vector<double> cx, cy;
  compact(x, y, mask, cx, cy);
  if (cx.size() < 2) return std::nullopt;
  return pearson_dense(average_ranks(cx), average_ranks(cy));
}

std::optional<double> point_biserial(std::span<const double> dwg, std::span<const double> dt,
                                     Mask mask) {
  check_sizes(dwg.size(), dt.size(), mask);
  std::vector<double> cx, cy;
  compact(dwg, dt, mask, cx, cy);
  require_dichotomy(cy);
  return point_biserial_dense(cx, cy);
}

std::optional<double> brogden_biserial(std::span<const double> dwg, std::span<const double> dt,
                                       Mask mask, BrogdenOptions options) {
  check_sizes(dwg.size(), dt.size(), mask);
  std::vector<double> cx, cy, scratch;
  compact(dwg, dt, mask, cx, cy);
  require_dichotomy(cy);
  return brogden_from_values(group_means(cx, cy), cx, scratch, options);
}

std::optional<double> rank_biserial(std::span<const double> dwg, std::span<const double> dt,
                                    Mask mask) {
  check_sizes(dwg.size(), dt.size(), mask);
  std::vector<double> cx, cy;
  compact(dwg, dt, mask, cx, cy);
  require_dichotomy(cy);
  if (cx.empty()) return std::nullopt;
  return rank_biserial_from_ranks(average_ranks(cx), cy);
}

std::size_t CorrelationProfile::undefined_count() const {
  return static_cast<std::size_t>(std::count(defined.begin(), defined.end(), std::uint8_t{0}));
}

ProfileEvaluator::ProfileEvaluator(const PerVariableDissimilarity& pvd, CorrelationMode mode,
                                   CorrelationOptions options)
    : pvd_(&pvd), mode_(mode), options_(options), vars_(pvd.variables()) {
  const bool rank_mode =
      mode == CorrelationMode::kSpearman || mode == CorrelationMode::kSpearmanBiserial;
  const bool biserial_mode =
      mode == CorrelationMode::kPearsonBiserial || mode == CorrelationMode::kSpearmanBiserial;
  for (std::size_t t = 0; t < pvd.variables(); ++t) {
    auto& info = vars_[t];
    const auto d = pvd.d(t);
    const auto delta = pvd.delta(t);
    bool dich = false;
    bool all = true;
    std::vector<double> present;
    for (std::size_t k = 0; k < pvd.pairs(); ++k) {
      if (!delta[k]) {
        all = false;
        continue;
      }
      present.push_back(d[k]);
    }
    dich = !present.empty() &&
           std::all_of(present.begin(), present.end(), [](double v) { return v == 0.0 || v == 1.0; });
    info.dichotomous = dich;
    info.all_delta = all;
    if (rank_mode && !(biserial_mode && dich)) info.ranks = average_ranks(present);
  }
}

std::optional<double> ProfileEvaluator::correlate(std::size_t t, std::span<const double> weights,
                                                  Workspace& ws) const {
  const auto& info = vars_[t];
  const auto d = pvd_->d(t);
  const auto delta = pvd_->delta(t);
  const std::size_t m = pvd_->pairs();
  const auto& dwg = ws.dwg;

  // With w_t > 0 every pair where t contributes has a defined dwg, so the
  // effective mask is delta_t and the precomputed ranks of d_t stay valid.
  bool dwg_ok = weights[t] > 0.0;
  if (!dwg_ok) {
    dwg_ok = true;
    for (std::size_t k = 0; k < m && dwg_ok; ++k)
      if (delta[k] && !is_defined(dwg[k])) dwg_ok = false;
  }
  const bool global = info.all_delta && dwg_ok;

  ws.x.clear();
  ws.y.clear();
  std::span<const double> x = dwg;
  std::span<const double> y = d;
  if (!global) {
    for (std::size_t k = 0; k < m; ++k) {
      if (!delta[k] || !is_defined(dwg[k])) continue;
      ws.x.push_back(dwg[k]);
      ws.y.push_back(d[k]);
    }
    x = ws.x;
    y = ws.y;
  }

  const bool biserial = info.dichotomous && (mode_ == CorrelationMode::kPearsonBiserial ||
                                             mode_ == CorrelationMode::kSpearmanBiserial);
  switch (mode_) {
    case CorrelationMode::kPearson:
      return pearson_dense(x, y);
    case CorrelationMode::kPearsonBiserial: {
      if (!biserial) return pearson_dense(x, y);
      return brogden_from_values(group_means(x, y), x, ws.scratch, options_.brogden);
    }
    case CorrelationMode::kSpearman:
    case CorrelationMode::kSpearmanBiserial: {
      std::span<const double> rx;
      if (global) {
        if (!ws.ranks_ready) {
          ws.dwg_ranks.resize(m);
          average_ranks(dwg, ws.dwg_ranks, ws.keys, ws.order);
          ws.ranks_ready = true;
        }
        rx = ws.dwg_ranks;
      } else {
        ws.rx.resize(x.size());
        average_ranks(x, ws.rx, ws.keys, ws.order);
        rx = ws.rx;
      }
      if (biserial) return rank_biserial_from_ranks(rx, y);
      if (dwg_ok) return pearson_dense(rx, info.ranks);
      return pearson_dense(rx, average_ranks(y));
    }
  }
  return std::nullopt;
}

void ProfileEvaluator::evaluate(std::span<const double> weights, Workspace& ws,
                                CorrelationProfile& out) const {
  const std::size_t p = vars_.size();
  ws.dwg.resize(pvd_->pairs());
  aggregate(*pvd_, weights, ws.dwg);
  ws.ranks_ready = false;
  out.r.assign(p, kUndefined);
  out.defined.assign(p, 0);
  out.dichotomous.resize(p);
  for (std::size_t t = 0; t < p; ++t) {
    out.dichotomous[t] = vars_[t].dichotomous ? 1 : 0;
    if (const auto r = correlate(t, weights, ws)) {
      out.r[t] = *r;
      out.defined[t] = 1;
    }
  }
}

CorrelationProfile ProfileEvaluator::evaluate(std::span<const double> weights) const {
  Workspace ws;
  CorrelationProfile out;
  evaluate(weights, ws, out);
  return out;
}

CorrelationProfile correlation_profile(const PerVariableDissimilarity& pvd,
                                       std::span<const double> weights, CorrelationMode mode,
                                       CorrelationOptions options) {
  return ProfileEvaluator(pvd, mode, options).evaluate(weights);
}

}  // namespace gower
