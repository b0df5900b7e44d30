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

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "nhost/coverage.hpp"

namespace nhost {

namespace {

constexpr const char* kSitesHeader = "site_id,x_m,y_m,tier,power_dbm,tag";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

[[noreturn]] void bad_row(const std::filesystem::path& path, std::size_t line,
                          std::size_t column, const std::string& what) {
  throw std::runtime_error(path.string() + ": line " + std::to_string(line) +
                           ", column " + std::to_string(column) + ": " + what);
}

double parse_double(const std::string& s, const std::filesystem::path& path,
                    std::size_t line, std::size_t column) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    bad_row(path, line, column, "expected a number, got '" + s + "'");
  }
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

Deployment ingest_sites(const std::filesystem::path& path, double width_m,
                        double height_m, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open sites file: " + path.string());

  Deployment d;
  d.width_m = width_m;
  d.height_m = height_m;

  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line))
    throw std::runtime_error(path.string() + ": empty file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSitesHeader)
    throw std::runtime_error(path.string() +
                             ": line 1: expected header '" +
                             std::string(kSitesHeader) + "'");

  std::unordered_set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv(line);
    if (fields.size() != 6)
      bad_row(path, lineno, fields.size(),
              "expected 6 fields, got " + std::to_string(fields.size()));

    Site s;
    s.id = fields[0];
    if (s.id.empty()) bad_row(path, lineno, 1, "empty site_id");
    if (!seen_ids.insert(s.id).second)
      bad_row(path, lineno, 1, "duplicate site_id '" + s.id + "'");
    s.x_m = parse_double(fields[1], path, lineno, 2);
    s.y_m = parse_double(fields[2], path, lineno, 3);
    auto tier = tier_from_string(fields[3]);
    if (!tier)
      bad_row(path, lineno, 4, "unknown tier '" + fields[3] +
                                   "' (expected macro or small)");
    s.tier = *tier;
    s.tx_power_dbm = parse_double(fields[4], path, lineno, 5);
    s.tag = fields[5];

    if (s.x_m < 0 || s.x_m > width_m || s.y_m < 0 || s.y_m > height_m) {
      if (warnings)
        warnings->push_back("site '" + s.id + "' at (" + fmt6(s.x_m) + ", " +
                            fmt6(s.y_m) + ") lies outside the study area");
    }
    d.sites.push_back(std::move(s));
  }
  return d;
}

void write_grid_csv(const RssGrid& g, std::ostream& os) {
  os << "x_m,y_m,rss_dbm,serving_site\n";
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      std::size_t i = iy * g.nx + ix;
      os << fmt6(g.x_of(ix)) << ',' << fmt6(g.y_of(iy)) << ','
         << fmt6(g.rss_dbm[i]) << ',' << g.serving_site[i] << "\n";
    }
  }
}

void write_cdf_csv(const RestrictedCdf& c, std::ostream& os) {
  os << "rss_dbm,cumulative_fraction\n";
  for (const auto& [rss, frac] : c.points)
    os << fmt6(rss) << ',' << fmt6(frac) << "\n";
}

void write_sites_csv(const Deployment& d, std::ostream& os) {
  os << kSitesHeader << "\n";
  for (const auto& s : d.sites)
    os << s.id << ',' << fmt6(s.x_m) << ',' << fmt6(s.y_m) << ','
       << to_string(s.tier) << ',' << fmt6(s.tx_power_dbm) << ',' << s.tag
       << "\n";
}

}  // namespace nhost
