#include "nrd/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nrd::harness {

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t k = i;
    while (k + 1 < idx.size() && x[idx[k + 1]] == x[idx[i]]) ++k;
    const double r = 0.5 * static_cast<double>(i + k) + 1.0;
    for (std::size_t m = i; m <= k; ++m) rank[idx[m]] = r;
    i = k + 1;
  }
  return rank;
}

std::vector<const SiteSnapshot*> populated_housing(const std::vector<SiteSnapshot>& rows) {
  std::vector<const SiteSnapshot*> out;
  for (const auto& r : rows) {
    if (r.kind == SiteKind::housing && r.populated) out.push_back(&r);
  }
  return out;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: size mismatch");
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw std::invalid_argument("weighted_mean: size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += values[i] * weights[i];
    den += weights[i];
  }
  if (den <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return num / den;
}

double weighted_variance(std::span<const double> values, std::span<const double> weights) {
  const double mean = weighted_mean(values, weights);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += weights[i] * (values[i] - mean) * (values[i] - mean);
    den += weights[i];
  }
  if (den <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return num / den;
}

double amenity_endowment_spearman(const std::vector<SiteSnapshot>& rows) {
  std::vector<double> a, e;
  for (const auto* r : populated_housing(rows)) {
    a.push_back(r->amenity_score);
    e.push_back(r->exp_mean_endow);
  }
  return spearman(a, e);
}

double population_weighted_amenity(const std::vector<SiteSnapshot>& rows) {
  std::vector<double> a, p;
  for (const auto& r : rows) {
    if (r.kind != SiteKind::housing) continue;
    a.push_back(r.amenity_score);
    p.push_back(r.exp_pop);
  }
  return weighted_mean(a, p);
}

double segregation_index(const std::vector<SiteSnapshot>& rows) {
  std::vector<double> e, p;
  for (const auto* r : populated_housing(rows)) {
    e.push_back(r->exp_mean_endow);
    p.push_back(r->exp_pop);
  }
  return weighted_variance(e, p);
}

DecileContrast endowment_decile_amenity(const std::vector<SiteSnapshot>& rows) {
  auto sites = populated_housing(rows);
  if (sites.empty()) throw std::invalid_argument("no populated housing sites");
  std::stable_sort(sites.begin(), sites.end(), [](const SiteSnapshot* a, const SiteSnapshot* b) {
    if (a->exp_mean_endow != b->exp_mean_endow) return a->exp_mean_endow < b->exp_mean_endow;
    return a->site_id < b->site_id;
  });
  double total = 0.0;
  for (const auto* s : sites) total += s->exp_pop;
  const double target = 0.1 * total;

  auto tail_mean = [&](auto first, auto last) {
    double covered = 0.0, num = 0.0;
    for (auto it = first; it != last && (covered < target || it == first); ++it) {
      num += (*it)->amenity_score * (*it)->exp_pop;
      covered += (*it)->exp_pop;
    }
    return num / covered;
  };
  return {tail_mean(sites.begin(), sites.end()), tail_mean(sites.rbegin(), sites.rend())};
}

double core_population_share(const std::vector<SiteSnapshot>& rows, double fraction) {
  std::vector<const SiteSnapshot*> housing;
  double total = 0.0;
  for (const auto& r : rows) {
    if (r.kind != SiteKind::housing) continue;
    housing.push_back(&r);
    total += r.exp_pop;
  }
  if (housing.empty() || total <= 0.0) return 0.0;
  std::stable_sort(housing.begin(), housing.end(), [](const SiteSnapshot* a, const SiteSnapshot* b) {
    if (a->amenity_score != b->amenity_score) return a->amenity_score > b->amenity_score;
    return a->site_id < b->site_id;
  });
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(housing.size())));
  double core = 0.0;
  for (std::size_t i = 0; i < std::min(k, housing.size()); ++i) core += housing[i]->exp_pop;
  return core / total;
}

}  // namespace nrd::harness
