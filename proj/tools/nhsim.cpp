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
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nhost/agents.hpp"
#include "nhost/common.hpp"
#include "nhost/coverage.hpp"

namespace fs = std::filesystem;
using namespace nhost;

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit codes are a stable contract: 0 success, 1 usage/config error,
// 2 runtime failure.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct RuntimeFailure : std::exception {
  std::string msg;
  explicit RuntimeFailure(std::string m) : msg(std::move(m)) {}
  const char* what() const noexcept override { return msg.c_str(); }
};

struct CommonOpts {
  std::uint64_t seed = 1;
  double resolution_m = 5.0;
  double threshold_dbm = -42.0;
  std::string out_dir = "out";
  std::string format = "csv";
};

struct SynthOpts {
  std::string sites_file;  // empty → synthetic generation
  std::size_t macros = 5;
  std::size_t smalls = 40;
  double chain_fraction = 0.3;
  double width_m = 1000.0;
  double height_m = 1000.0;
};

// Buffered artifact set: nothing touches the filesystem until every
// artifact rendered successfully, so a failed run leaves no partial output.
class ArtifactSet {
 public:
  ArtifactSet(const std::string& out_dir, std::uint64_t seed,
              std::uint64_t config_digest)
      : dir_(out_dir) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "# seed=%llu config=%s version=%s\n",
                  static_cast<unsigned long long>(seed),
                  hex_digest(config_digest).c_str(), kVersion);
    header_ = buf;
  }

  std::string& add(const std::string& name) {
    files_.emplace_back(name, header_);
    return files_.back().second;
  }

  void flush() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec)
      throw RuntimeFailure("cannot create output directory '" + dir_ +
                           "': " + ec.message());
    for (const auto& [name, body] : files_) {
      fs::path p = fs::path(dir_) / name;
      std::ofstream os(p, std::ios::binary);
      if (!os) throw RuntimeFailure("cannot write " + p.string());
      os << body;
      if (!os) throw RuntimeFailure("write failed for " + p.string());
      std::cout << "wrote " << p.string() << "\n";
    }
  }

 private:
  std::string dir_;
  std::string header_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fold_config(std::uint64_t h, const std::string& s) {
  return fnv1a(s, h);
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void render_grid(const RssGrid& g, const std::string& format,
                 std::string& out) {
  std::ostringstream os;
  if (format == "jsonl") {
    for (std::size_t iy = 0; iy < g.ny; ++iy)
      for (std::size_t ix = 0; ix < g.nx; ++ix) {
        std::size_t i = iy * g.nx + ix;
        Json line;
        line["x_m"] = g.x_of(ix);
        line["y_m"] = g.y_of(iy);
        line["rss_dbm"] = g.rss_dbm[i];
        line["serving_site"] = g.serving_site[i];
        os << line.dump() << "\n";
      }
  } else {
    write_grid_csv(g, os);
  }
  out += os.str();
}

void render_cdf(const RestrictedCdf& c, const std::string& format,
                std::string& out) {
  std::ostringstream os;
  if (format == "jsonl") {
    for (const auto& [rss, frac] : c.points)
      os << Json{{"rss_dbm", rss}, {"cumulative_fraction", frac}}.dump()
         << "\n";
  } else {
    write_cdf_csv(c, os);
  }
  out += os.str();
}

std::string artifact_name(const std::string& stem, const std::string& format) {
  return stem + (format == "jsonl" ? ".jsonl" : ".csv");
}

// Either read the sites file or generate the synthetic layout; the config
// digest covers whichever path was taken.
Deployment resolve_deployment(const SynthOpts& synth, std::uint64_t seed,
                              std::uint64_t& digest) {
  if (!synth.sites_file.empty()) {
    digest = fold_config(digest, slurp(synth.sites_file));
    std::vector<std::string> warnings;
    Deployment d =
        ingest_sites(synth.sites_file, synth.width_m, synth.height_m,
                     &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return d;
  }
  digest = fold_config(
      digest, "synthetic:" + std::to_string(synth.macros) + "," +
                  std::to_string(synth.smalls) + "," +
                  fmt6(synth.chain_fraction) + "," + fmt6(synth.width_m) +
                  "," + fmt6(synth.height_m));
  return generate_synthetic_deployment(synth.macros, synth.smalls,
                                       synth.chain_fraction, synth.width_m,
                                       synth.height_m, seed);
}

std::uint64_t base_digest(const CommonOpts& c) {
  std::uint64_t d = fnv1a_u64(c.seed);
  d = fold_config(d, fmt6(c.resolution_m));
  d = fold_config(d, fmt6(c.threshold_dbm));
  d = fold_config(d, c.format);
  return d;
}

Deployment subset(const Deployment& d, bool macros_only, bool include_chain) {
  Deployment out;
  out.width_m = d.width_m;
  out.height_m = d.height_m;
  for (const auto& s : d.sites) {
    if (s.tier == Tier::Macro) {
      out.sites.push_back(s);
    } else if (!macros_only && (include_chain ? s.tag == "chain" : true)) {
      out.sites.push_back(s);
    }
  }
  return out;
}

int cmd_sim_run(const std::string& scenario_path, const CommonOpts& common,
                const std::string& billing_override, bool seed_overridden) {
  std::string raw = slurp(scenario_path);
  SimScenario sc = load_scenario(scenario_path);
  if (seed_overridden) sc.seed = common.seed;
  if (!billing_override.empty()) {
    if (billing_override == "per_byte") {
      sc.billing_mode = BillingMode::PerByte;
    } else if (billing_override == "per_attachment_time") {
      sc.billing_mode = BillingMode::PerAttachmentTime;
    } else {
      throw std::invalid_argument("unknown billing mode: " +
                                  billing_override);
    }
  }
  auto problems = sc.validate();
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << "error: " << p << "\n";
    return kExitConfig;
  }

  std::uint64_t digest = fnv1a_u64(sc.seed);
  digest = fold_config(digest, raw);
  digest = fold_config(digest, to_string(sc.billing_mode));

  SimTrace trace = run_scenario(sc);

  ArtifactSet artifacts(common.out_dir, sc.seed, digest);
  {
    std::ostringstream os;
    write_trace_jsonl(trace, os);
    artifacts.add("trace.jsonl") += os.str();
  }
  {
    std::ostringstream os;
    write_accounting_csv(trace, os);
    artifacts.add("accounting.csv") += os.str();
  }
  artifacts.flush();
  std::cout << "trace digest " << hex_digest(trace.digest()) << "\n";
  return kExitOk;
}

int cmd_coverage_map(const CommonOpts& common, const SynthOpts& synth) {
  std::uint64_t digest = base_digest(common);
  Deployment d = resolve_deployment(synth, common.seed, digest);
  ChannelModel m = ChannelModel::defaults();
  RssGrid g = rss_map(d, m, common.resolution_m, common.seed);

  ArtifactSet artifacts(common.out_dir, common.seed, digest);
  render_grid(g, common.format, artifacts.add(artifact_name("grid",
                                                            common.format)));
  {
    std::ostringstream os;
    write_sites_csv(d, os);
    artifacts.add("sites.csv") += os.str();
  }
  artifacts.flush();
  return kExitOk;
}

int cmd_coverage_cdf(const CommonOpts& common, const SynthOpts& synth) {
  std::uint64_t digest = base_digest(common);
  Deployment d = resolve_deployment(synth, common.seed, digest);
  ChannelModel m = ChannelModel::defaults();
  RssGrid g = rss_map(d, m, common.resolution_m, common.seed);
  RestrictedCdf c = restricted_cdf(g, common.threshold_dbm);

  ArtifactSet artifacts(common.out_dir, common.seed, digest);
  render_cdf(c, common.format, artifacts.add(artifact_name("cdf",
                                                           common.format)));
  std::cout << "below_fraction " << fmt6(c.below_fraction) << "\n";
  artifacts.flush();
  return kExitOk;
}

int cmd_coverage_compare(const CommonOpts& common, const SynthOpts& synth) {
  std::uint64_t digest = base_digest(common);
  Deployment all = resolve_deployment(synth, common.seed, digest);
  Deployment baseline = subset(all, true, false);
  Deployment chain = subset(all, false, true);

  ChannelModel m = ChannelModel::defaults();
  RssGrid g_base = rss_map(baseline, m, common.resolution_m, common.seed);

  ArtifactSet artifacts(common.out_dir, common.seed, digest);
  render_grid(g_base, common.format,
              artifacts.add(artifact_name("grid_baseline", common.format)));
  render_cdf(restricted_cdf(g_base, common.threshold_dbm), common.format,
             artifacts.add(artifact_name("cdf_baseline", common.format)));

  bool has_small = chain.sites.size() > baseline.sites.size() ||
                   all.sites.size() > baseline.sites.size();
  if (has_small) {
    RssGrid g_chain = rss_map(chain, m, common.resolution_m, common.seed);
    RssGrid g_all = rss_map(all, m, common.resolution_m, common.seed);
    render_grid(g_chain, common.format,
                artifacts.add(artifact_name("grid_chain", common.format)));
    render_grid(g_all, common.format,
                artifacts.add(artifact_name("grid_all", common.format)));
    render_cdf(restricted_cdf(g_chain, common.threshold_dbm), common.format,
               artifacts.add(artifact_name("cdf_chain", common.format)));
    render_cdf(restricted_cdf(g_all, common.threshold_dbm), common.format,
               artifacts.add(artifact_name("cdf_all", common.format)));

    ScenarioComparison vs_chain = compare_scenarios(g_base, g_chain);
    ScenarioComparison vs_all = compare_scenarios(g_base, g_all);
    std::string& stats = artifacts.add("stats.csv");
    stats +=
        "scenario,mean_gain_db,improved_points,total_points,max_gain_db,"
        "below_fraction\n";
    auto row = [&](const std::string& name, const ScenarioComparison& c,
                   double below) {
      stats += name + ',' + fmt6(c.mean_gain_db) + ',' +
               std::to_string(c.improved_points) + ',' +
               std::to_string(c.total_points) + ',' + fmt6(c.max_gain_db) +
               ',' + fmt6(below) + "\n";
    };
    row("chain", vs_chain,
        restricted_cdf(g_chain, common.threshold_dbm).below_fraction);
    row("all", vs_all,
        restricted_cdf(g_all, common.threshold_dbm).below_fraction);
  } else {
    std::cout << "no small cells in input; baseline artifacts only\n";
  }
  artifacts.flush();
  return kExitOk;
}

int cmd_validate(const std::vector<std::string>& paths, double width_m,
                 double height_m) {
  int bad = 0;
  for (const auto& p : paths) {
    std::vector<std::string> errors;
    fs::path path(p);
    try {
      if (path.extension() == ".csv") {
        std::vector<std::string> warnings;
        ingest_sites(path, width_m, height_m, &warnings);
        for (const auto& w : warnings) std::cerr << p << ": warning: " << w
                                                 << "\n";
      } else {
        SimScenario sc = load_scenario(path);
        errors = sc.validate();
      }
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
    if (errors.empty()) {
      std::cout << p << ": ok\n";
    } else {
      ++bad;
      for (const auto& e : errors) std::cerr << p << ": error: " << e << "\n";
    }
  }
  return bad == 0 ? kExitOk : kExitConfig;
}

void add_synth_opts(CLI::App* cmd, SynthOpts& synth) {
  cmd->add_option("--sites", synth.sites_file,
                  "Sites CSV (site_id,x_m,y_m,tier,power_dbm,tag); omit to "
                  "generate a synthetic deployment");
  cmd->add_option("--macros", synth.macros, "Synthetic macro site count");
  cmd->add_option("--smalls", synth.smalls, "Synthetic small site count");
  cmd->add_option("--chain-fraction", synth.chain_fraction,
                  "Fraction of synthetic small sites tagged 'chain'");
  cmd->add_option("--width-m", synth.width_m, "Study area width in meters");
  cmd->add_option("--height-m", synth.height_m, "Study area height in meters");
}

void add_common_opts(CLI::App* cmd, CommonOpts& common) {
  cmd->add_option("--seed", common.seed, "Random seed (stamped into outputs)");
  cmd->add_option("--resolution-m", common.resolution_m,
                  "Grid resolution in meters");
  cmd->add_option("--threshold-dbm", common.threshold_dbm,
                  "Restricted-CDF threshold in dBm");
  cmd->add_option("--out-dir", common.out_dir, "Output directory");
  cmd->add_option("--format", common.format, "Artifact format")
      ->check(CLI::IsMember({"csv", "jsonl"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic neutral-host small-cell simulator"};
  app.set_version_flag("--version", std::string("nhsim ") + kVersion);
  app.require_subcommand(1);

  CommonOpts common;
  SynthOpts synth;
  std::string scenario_path;
  std::string billing_mode;
  std::vector<std::string> validate_paths;

  CLI::App* sim = app.add_subcommand("sim", "Agent simulation");
  sim->require_subcommand(1);
  CLI::App* sim_run =
      sim->add_subcommand("run", "Run a scenario end to end");
  sim_run->add_option("scenario", scenario_path, "Scenario JSON file")
      ->required();
  CLI::Option* seed_opt =
      sim_run->add_option("--seed", common.seed, "Override the scenario seed");
  sim_run->add_option("--billing-mode", billing_mode,
                      "Override the scenario billing mode")
      ->check(CLI::IsMember({"per_byte", "per_attachment_time"}));
  sim_run->add_option("--out-dir", common.out_dir, "Output directory");

  CLI::App* coverage = app.add_subcommand("coverage", "RF coverage engine");
  coverage->require_subcommand(1);
  CLI::App* cov_map =
      coverage->add_subcommand("map", "Strongest-signal RSS grid");
  CLI::App* cov_cdf =
      coverage->add_subcommand("cdf", "Restricted CDF below a threshold");
  CLI::App* cov_cmp = coverage->add_subcommand(
      "compare", "Baseline vs chain-augmented vs all-augmented");
  for (CLI::App* c : {cov_map, cov_cdf, cov_cmp}) {
    add_common_opts(c, common);
    add_synth_opts(c, synth);
  }

  CLI::App* validate =
      app.add_subcommand("validate", "Schema-check files without running");
  validate->add_option("files", validate_paths, "Scenario JSON or sites CSV")
      ->required();
  validate->add_option("--width-m", synth.width_m,
                       "Study area width for sites files");
  validate->add_option("--height-m", synth.height_m,
                       "Study area height for sites files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim_run->parsed())
      return cmd_sim_run(scenario_path, common, billing_mode,
                         seed_opt->count() > 0);
    if (cov_map->parsed()) return cmd_coverage_map(common, synth);
    if (cov_cdf->parsed()) return cmd_coverage_cdf(common, synth);
    if (cov_cmp->parsed()) return cmd_coverage_compare(common, synth);
    if (validate->parsed())
      return cmd_validate(validate_paths, synth.width_m, synth.height_m);
  } catch (const RuntimeFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
