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

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace nhost {

enum class Tier { Macro, Small };
const char* to_string(Tier t);
std::optional<Tier> tier_from_string(const std::string& s);

struct Site {
  std::string id;
  double x_m = 0;
  double y_m = 0;
  Tier tier = Tier::Small;
  double tx_power_dbm = 0;
  std::string tag;  // "macro", "chain", "independent", ...
};

struct Deployment {
  std::vector<Site> sites;
  double width_m = 0;
  double height_m = 0;
  // Geo anchor of the south-east corner, provenance only.
  std::optional<std::pair<double, double>> origin_lat_lon;
};

// Log-distance pathloss A + B*log10(d_km) per tier, plus lognormal
// shadowing. Distances below min_distance_m clamp to min_distance_m.
struct TierPathloss {
  double intercept_db = 0;  // A
  double slope_db = 0;      // B, per decade of km
  double shadow_sigma_db = 0;
};

struct ChannelModel {
  TierPathloss macro{128.1, 37.6, 8.0};
  TierPathloss small{140.7, 36.7, 10.0};
  double min_distance_m = 1.0;

  const TierPathloss& tier(Tier t) const {
    return t == Tier::Macro ? macro : small;
  }

  // Defaults with min_distance_m calibrated so the strongest small-cell
  // sample (sigma = 0) sits at `small_cell_peak_rss_dbm` for the given
  // small-cell transmit power.
  static ChannelModel defaults(double small_tx_power_dbm = 24.0,
                               double small_cell_peak_rss_dbm = -42.0);
};

// Distance at which tx_power - pathloss equals target_rss (the inverse of
// the log-distance model), in meters.
double distance_for_rss(const TierPathloss& pl, double tx_power_dbm,
                        double target_rss_dbm);

double pathloss_db(const ChannelModel& m, Tier tier, double distance_m);

inline constexpr double kRssSentinel =
    -std::numeric_limits<double>::infinity();
inline constexpr std::int32_t kNoServingSite = -1;

struct RssGrid {
  double resolution_m = 0;
  double width_m = 0;
  double height_m = 0;
  std::size_t nx = 0;  // points along x
  std::size_t ny = 0;
  std::vector<double> rss_dbm;           // row-major, [iy*nx + ix]
  std::vector<std::int32_t> serving_site;  // index into deployment sites

  double at(std::size_t ix, std::size_t iy) const {
    return rss_dbm[iy * nx + ix];
  }
  double x_of(std::size_t ix) const { return static_cast<double>(ix) * resolution_m; }
  double y_of(std::size_t iy) const { return static_cast<double>(iy) * resolution_m; }
  bool same_geometry(const RssGrid& o) const {
    return resolution_m == o.resolution_m && nx == o.nx && ny == o.ny;
  }
};

// Reproducible shadowing draw for one (site, point) pair; keyed on site id
// and quantized point coordinates so coincident points agree across grid
// resolutions.
double shadowing_db(std::uint64_t seed, const Site& site, double x_m,
                    double y_m);

// Per-site RSS at one point, shadowing included.
double site_rss_dbm(const Site& site, const ChannelModel& m, double x_m,
                    double y_m, std::uint64_t seed);

// Strongest-signal map: each grid point takes the max over all sites.
// Throws std::invalid_argument unless resolution divides the area.
RssGrid rss_map(const Deployment& d, const ChannelModel& m,
                double resolution_m, std::uint64_t seed);

struct RestrictedCdf {
  // (rss_dbm, cumulative fraction) over the sub-population below the
  // threshold; empty when no point qualifies.
  std::vector<std::pair<double, double>> points;
  double below_fraction = 0;  // |sub-population| / |all points|
};

RestrictedCdf restricted_cdf(const RssGrid& g, double threshold_dbm);

struct ScenarioComparison {
  double mean_gain_db = 0;
  std::size_t improved_points = 0;
  double max_gain_db = 0;
  std::size_t total_points = 0;
};

// augmented - baseline, pointwise. Throws on geometry mismatch.
ScenarioComparison compare_scenarios(const RssGrid& baseline,
                                     const RssGrid& augmented);

// Uniform random placement; round(chain_fraction * small_count) small
// sites are tagged "chain", the rest "independent".
Deployment generate_synthetic_deployment(std::size_t macro_count,
                                         std::size_t small_count,
                                         double chain_fraction,
                                         double width_m, double height_m,
                                         std::uint64_t seed);

// CSV with header site_id,x_m,y_m,tier,power_dbm,tag. Malformed rows
// raise std::runtime_error naming line and column; out-of-bounds
// coordinates produce a warning but keep the site.
Deployment ingest_sites(const std::filesystem::path& path, double width_m,
                        double height_m,
                        std::vector<std::string>* warnings = nullptr);

// Plot-ready exports; floats printed with 6 decimals.
void write_grid_csv(const RssGrid& g, std::ostream& os);
void write_cdf_csv(const RestrictedCdf& c, std::ostream& os);
void write_sites_csv(const Deployment& d, std::ostream& os);

}  // namespace nhost
