// Copyright 2026 The nhsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nhost/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nhost/common.hpp"
#include "nhost/rng.hpp"

namespace nhost {

const char* to_string(Tier t) {
  return t == Tier::Macro ? "macro" : "small";
}

std::optional<Tier> tier_from_string(const std::string& s) {
  if (s == "macro") return Tier::Macro;
  if (s == "small") return Tier::Small;
  return std::nullopt;
}

double distance_for_rss(const TierPathloss& pl, double tx_power_dbm,
                        double target_rss_dbm) {
  // target = tx - (A + B*log10(d_km))  =>  d_km = 10^((tx - target - A) / B)
  double d_km =
      std::pow(10.0, (tx_power_dbm - target_rss_dbm - pl.intercept_db) /
                         pl.slope_db);
  return d_km * 1000.0;
}

ChannelModel ChannelModel::defaults(double small_tx_power_dbm,
                                    double small_cell_peak_rss_dbm) {
  ChannelModel m;
  m.min_distance_m = distance_for_rss(m.small, small_tx_power_dbm,
                                      small_cell_peak_rss_dbm);
  return m;
}

double pathloss_db(const ChannelModel& m, Tier tier, double distance_m) {
  const TierPathloss& pl = m.tier(tier);
  double d_km = std::max(distance_m, m.min_distance_m) / 1000.0;
  return pl.intercept_db + pl.slope_db * std::log10(d_km);
}

double shadowing_db(std::uint64_t seed, const Site& site, double x_m,
                    double y_m) {
  // Quantize to millimeters so points that coincide across different grid
  // resolutions hash to the same key.
  auto q = [](double v) {
    return static_cast<std::uint64_t>(
        static_cast<std::int64_t>(std::llround(v * 1000.0)));
  };
  std::uint64_t h = fnv1a(site.id, fnv1a_u64(seed));
  h = fnv1a_u64(q(x_m), h);
  h = fnv1a_u64(q(y_m), h);
  DetRng rng(h);
  return rng.next_normal();
}

double site_rss_dbm(const Site& site, const ChannelModel& m, double x_m,
                    double y_m, std::uint64_t seed) {
  double dx = x_m - site.x_m;
  double dy = y_m - site.y_m;
  double d = std::sqrt(dx * dx + dy * dy);
  double sigma = m.tier(site.tier).shadow_sigma_db;
  double shadow =
      sigma > 0.0 ? sigma * shadowing_db(seed, site, x_m, y_m) : 0.0;
  return site.tx_power_dbm - pathloss_db(m, site.tier, d) + shadow;
}

RssGrid rss_map(const Deployment& d, const ChannelModel& m,
                double resolution_m, std::uint64_t seed) {
  if (resolution_m <= 0.0)
    throw std::invalid_argument("coverage: resolution must be positive");
  if (d.width_m <= 0.0 || d.height_m <= 0.0)
    throw std::invalid_argument("coverage: area dimensions must be positive");
  double fx = d.width_m / resolution_m;
  double fy = d.height_m / resolution_m;
  if (std::abs(fx - std::round(fx)) > 1e-9 ||
      std::abs(fy - std::round(fy)) > 1e-9)
    throw std::invalid_argument(
        "coverage: resolution must divide the area dimensions");

  RssGrid g;
  g.resolution_m = resolution_m;
  g.width_m = d.width_m;
  g.height_m = d.height_m;
  g.nx = static_cast<std::size_t>(std::llround(fx)) + 1;
  g.ny = static_cast<std::size_t>(std::llround(fy)) + 1;
  g.rss_dbm.assign(g.nx * g.ny, kRssSentinel);
  g.serving_site.assign(g.nx * g.ny, kNoServingSite);

  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    double y = g.y_of(iy);
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      double x = g.x_of(ix);
      double best = kRssSentinel;
      std::int32_t best_site = kNoServingSite;
      for (std::size_t s = 0; s < d.sites.size(); ++s) {
        double rss = site_rss_dbm(d.sites[s], m, x, y, seed);
        if (rss > best) {
          best = rss;
          best_site = static_cast<std::int32_t>(s);
        }
      }
      g.rss_dbm[iy * g.nx + ix] = best;
      g.serving_site[iy * g.nx + ix] = best_site;
    }
  }
  return g;
}

RestrictedCdf restricted_cdf(const RssGrid& g, double threshold_dbm) {
  RestrictedCdf c;
  std::vector<double> below;
  for (double v : g.rss_dbm)
    if (v < threshold_dbm) below.push_back(v);
  if (g.rss_dbm.empty()) return c;
  c.below_fraction =
      static_cast<double>(below.size()) / static_cast<double>(g.rss_dbm.size());
  if (below.empty()) return c;
  std::sort(below.begin(), below.end());
  double n = static_cast<double>(below.size());
  for (std::size_t i = 0; i < below.size(); ++i)
    c.points.emplace_back(below[i], static_cast<double>(i + 1) / n);
  return c;
}

ScenarioComparison compare_scenarios(const RssGrid& baseline,
                                     const RssGrid& augmented) {
  if (!baseline.same_geometry(augmented))
    throw std::invalid_argument(
        "coverage: cannot compare grids with different geometry");
  ScenarioComparison cmp;
  cmp.total_points = baseline.rss_dbm.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < baseline.rss_dbm.size(); ++i) {
    double gain = augmented.rss_dbm[i] - baseline.rss_dbm[i];
    sum += gain;
    if (gain > 0.0) ++cmp.improved_points;
    cmp.max_gain_db = std::max(cmp.max_gain_db, gain);
  }
  if (cmp.total_points > 0)
    cmp.mean_gain_db = sum / static_cast<double>(cmp.total_points);
  return cmp;
}

Deployment generate_synthetic_deployment(std::size_t macro_count,
                                         std::size_t small_count,
                                         double chain_fraction,
                                         double width_m, double height_m,
                                         std::uint64_t seed) {
  Deployment d;
  d.width_m = width_m;
  d.height_m = height_m;
  DetRng rng(fnv1a_u64(seed, fnv1a("synthetic-deployment")));
  for (std::size_t i = 0; i < macro_count; ++i) {
    Site s;
    s.id = "macro" + std::to_string(i);
    s.x_m = rng.next_unit() * width_m;
    s.y_m = rng.next_unit() * height_m;
    s.tier = Tier::Macro;
    s.tx_power_dbm = 46.0;
    s.tag = "macro";
    d.sites.push_back(std::move(s));
  }
  std::size_t chain_count = static_cast<std::size_t>(
      std::llround(chain_fraction * static_cast<double>(small_count)));
  for (std::size_t i = 0; i < small_count; ++i) {
    Site s;
    s.id = "small" + std::to_string(i);
    s.x_m = rng.next_unit() * width_m;
    s.y_m = rng.next_unit() * height_m;
    s.tier = Tier::Small;
    s.tx_power_dbm = 24.0;
    s.tag = i < chain_count ? "chain" : "independent";
    d.sites.push_back(std::move(s));
  }
  return d;
}

}  // namespace nhost
