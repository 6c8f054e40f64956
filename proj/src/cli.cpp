#include "patrol/cli.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "patrol/chain_partition.hpp"
#include "patrol/chain_trajectories.hpp"
#include "patrol/cyclic_approx.hpp"
#include "patrol/metrics.hpp"
#include "patrol/roadmap.hpp"
#include "patrol/sync_sim.hpp"
#include "patrol/tree_patrol.hpp"

namespace patrol::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex(const unsigned char* data, unsigned int len) {
  std::ostringstream s;
  for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(data[i]);
  return s.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line number
    const auto upto = text.substr(0, std::min<std::size_t>(e.byte, text.size()));
    const auto line = 1 + std::count(upto.begin(), upto.end(), '\n');
    throw std::invalid_argument(path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
}

// Everything a command needs to record in its manifest.
struct Run {
  std::string command;
  std::vector<std::string> args;
  std::map<std::string, fs::path> inputs;
  std::vector<fs::path> outputs;
  std::optional<std::uint64_t> seed;
  std::string manifest;

  void write(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    out.close();
    outputs.push_back(path);
  }
  void write_json(const fs::path& path, const json& doc) { write(path, doc.dump(2) + "\n"); }
};

struct Common {
  std::string roadmap;
  bool allow_triangle = false;
};

void add_roadmap(CLI::App* sub, Common& c) {
  sub->add_option("--roadmap", c.roadmap, "roadmap JSON file")->required();
  sub->add_flag("--allow-triangle-violations", c.allow_triangle,
                "demote triangle-inequality violations to warnings");
}

LoadedRoadmap load(Run& run, const Common& c, std::ostream& err) {
  LoadedRoadmap r = load_roadmap_file(c.roadmap, {.strict_triangle = !c.allow_triangle});
  run.inputs["roadmap"] = c.roadmap;
  for (const std::string& w : r.graph.warnings()) err << "warning: " << c.roadmap << ": " << w << "\n";
  return r;
}

const ChainRoadmap& need_chain(const LoadedRoadmap& r, const std::string& what) {
  if (!r.chain) throw std::invalid_argument(what + " needs a chain roadmap");
  return *r.chain;
}

Partition make_partition(const ChainRoadmap& chain, std::size_t m, double eps) {
  return optimal_partition_bisect(chain, m, eps).partition;
}

std::vector<double> parse_variances(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    double a = 0.0, b = 0.0, step = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream s(spec);
    if (!(s >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0) || b < a) {
      throw std::invalid_argument("--variances expects start:stop:step or a comma list");
    }
    const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long k = 0; k <= count; ++k) out.push_back(std::round((a + static_cast<double>(k) * step) * 1e12) / 1e12);
    return out;
  }
  std::istringstream s(spec);
  std::string item;
  while (std::getline(s, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("--variances: bad value '" + item + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument("--variances is empty");
  return out;
}

// "robot:start[:end]", robot 1-based; no end means a permanent stop.
FailureWindow parse_failure(const std::string& spec) {
  std::vector<std::string> parts;
  std::istringstream s(spec);
  std::string item;
  while (std::getline(s, item, ':')) parts.push_back(item);
  if (parts.size() < 2 || parts.size() > 3) throw std::invalid_argument("--fail expects robot:start[:end]");
  try {
    FailureWindow f;
    const long robot = std::stol(parts[0]);
    if (robot < 1) throw std::invalid_argument("robot");
    f.robot = static_cast<std::size_t>(robot - 1);
    f.start = std::stod(parts[1]);
    if (parts.size() == 3) f.end = std::stod(parts[2]);
    return f;
  } catch (const std::exception&) {
    throw std::invalid_argument("--fail: cannot parse '" + spec + "'");
  }
}

json resolved_config(const CLI::App* sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt == sub->get_help_ptr()) continue;
    const std::string name = opt->get_single_name();
    const auto& res = opt->results();
    if (!res.empty()) {
      cfg[name] = res.size() == 1 ? json(res.front()) : json(res);
    } else if (opt->get_items_expected_max() == 0) {
      cfg[name] = "false";
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    } else {
      cfg[name] = nullptr;
    }
  }
  return cfg;
}

void write_manifest(const Run& run, const CLI::App* sub) {
  if (run.outputs.empty()) return;
  const fs::path path = run.manifest.empty() ? fs::path(run.outputs.front().string() + ".manifest.json")
                                             : fs::path(run.manifest);
  json inputs = json::object();
  for (const auto& [role, p] : run.inputs) inputs[role] = {{"path", p.string()}, {"sha256", sha256_file(p)}};
  json outputs = json::array();
  for (const fs::path& p : run.outputs) outputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  json doc = {{"command", run.command},
              {"args", run.args},
              {"config", resolved_config(sub)},
              {"inputs", inputs},
              {"seed", run.seed ? json(*run.seed) : json(nullptr)},
              {"version", kVersion},
              {"outputs", outputs}};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << doc.dump(2) << "\n";
}

int rerun(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  const json doc = read_json(manifest_path);
  std::vector<std::string> args;
  std::vector<std::pair<std::string, std::string>> expected;
  try {
    args = doc.at("args").get<std::vector<std::string>>();
    for (const auto& [role, in] : doc.at("inputs").items()) {
      const std::string p = in.at("path").get<std::string>();
      if (!fs::exists(p) || sha256_file(p) != in.at("sha256").get<std::string>()) {
        err << "error: input '" << p << "' (" << role << ") changed since the manifest was written\n";
        return kInvalid;
      }
    }
    for (const auto& o : doc.at("outputs")) expected.emplace_back(o.at("path"), o.at("sha256"));
  } catch (const json::exception& e) {
    throw std::invalid_argument(manifest_path + ": " + e.what());
  }
  if (doc.value("version", "") != kVersion) {
    err << "warning: manifest written by version " << doc.value("version", "?") << "\n";
  }
  const int code = dispatch(args, out, err);
  if (code != kOk) return code;
  bool same = true;
  for (const auto& [p, sha] : expected) {
    const bool ok = fs::exists(p) && sha256_file(p) == sha;
    out << (ok ? "reproduced " : "MISMATCH ") << p << "\n";
    same = same && ok;
  }
  return same ? kOk : kInvalid;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  const std::string bytes = read_file(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  return hex(md, len);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-robot patrolling on metric roadmaps", "patrol"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common com;
  std::size_t m = 0;
  double eps = 1e-9;
  double horizon = 200.0;
  std::string out_path;
  std::string manifest;
  std::function<int(Run&)> action;

  auto robots = [&](CLI::App* s) {
    s->add_option("-m,--robots", m, "number of robots")->required()->check(CLI::PositiveNumber);
  };
  auto output = [&](CLI::App* s, const std::string& what) {
    s->add_option("--out", out_path, what)->required();
    s->add_option("--manifest", manifest, "manifest path (default: <out>.manifest.json)");
  };

  // partition
  bool exact = false;
  CLI::App* part = app.add_subcommand("partition", "optimal chain partition");
  add_roadmap(part, com);
  robots(part);
  part->add_option("--eps", eps, "bisection tolerance")->capture_default_str();
  part->add_flag("--exact", exact, "exhaustive optimum instead of bisection");
  output(part, "partition JSON");
  part->callback([&] {
    action = [&](Run& run) {
      const LoadedRoadmap r = load(run, com, err);
      const ChainRoadmap& chain = need_chain(r, "partition");
      json doc;
      if (exact) {
        doc = to_json(chain, optimal_partition_exact(chain, m));
      } else {
        const BisectionResult res = optimal_partition_bisect(chain, m, eps);
        doc = to_json(chain, res.partition, std::pair{res.report.lower, res.report.upper});
        doc["iterations"] = res.report.iterations;
        doc["iteration_bound"] = res.report.iteration_bound;
      }
      run.write_json(out_path, doc);
      return kOk;
    };
  });

  // synth
  std::string mode = "refresh";
  CLI::App* synth = app.add_subcommand("synth", "synthesize a chain team trajectory");
  add_roadmap(synth, com);
  robots(synth);
  synth->add_option("--eps", eps)->capture_default_str();
  synth->add_option("--mode", mode, "refresh | opposite | uplat | lat")
      ->check(CLI::IsMember({"refresh", "opposite", "uplat", "lat"}))
      ->capture_default_str();
  synth->add_option("--horizon", horizon)->capture_default_str()->check(CLI::PositiveNumber);
  output(synth, "trajectory JSON");
  synth->callback([&] {
    action = [&](Run& run) {
      const LoadedRoadmap r = load(run, com, err);
      const ChainRoadmap& chain = need_chain(r, "synth");
      const Partition p = make_partition(chain, m, eps);
      TeamTrajectory x;
      if (mode == "refresh") x = traj_min_refresh(chain, p, horizon);
      if (mode == "opposite") x = traj_opposite_phase(chain, p, horizon);
      if (mode == "uplat") x = traj_min_uplatency(chain, p, horizon);
      if (mode == "lat") x = traj_min_latency(chain, p, horizon);
      run.write_json(out_path, {{"mode", mode},
                                {"roadmap", to_json(r)},
                                {"partition", to_json(chain, p)},
                                {"trajectory", to_json(x, &r.graph)}});
      return kOk;
    };
  });

  // eval
  std::string trace_path;
  double warmup = 0.0;
  double eta = 0.0;
  CLI::App* ev = app.add_subcommand("eval", "refresh time and latency of a synthesized trajectory");
  ev->add_option("--trace", trace_path, "output of synth")->required();
  ev->add_option("--warmup", warmup)->capture_default_str();
  ev->add_option("--eta", eta, "visit tolerance")->capture_default_str();
  output(ev, "metrics JSON");
  ev->callback([&] {
    action = [&](Run& run) {
      const json doc = read_json(trace_path);
      run.inputs["trace"] = trace_path;
      if (!doc.contains("roadmap") || !doc.contains("trajectory")) {
        throw std::invalid_argument(trace_path + ": expected the roadmap and trajectory written by synth");
      }
      LoadedRoadmap r = load_roadmap(doc["roadmap"]);
      const TeamTrajectory x = trajectory_from_json(doc["trajectory"], r.graph.size());
      const double rt = eval_refresh_time(x, {.warmup = warmup, .eta = eta});
      std::optional<Latency> lat;
      std::optional<LatencyBounds> bounds;
      std::size_t active = 0;
      for (const RobotTrack& t : x.robots) active += t.active ? 1 : 0;
      if (r.chain && active >= 2) {
        LatencyOptions lo;
        lo.eta = eta;
        lo.window_start = warmup;
        lat = eval_latency(x, *r.chain, lo);
        if (doc.contains("partition")) bounds = latency_lower_bounds(partition_from_json(*r.chain, doc["partition"]));
      }
      run.write_json(out_path, metrics_report(rt, lat, bounds));
      return kOk;
    };
  });

  // simulate
  SimConfig sim;
  std::vector<std::string> fails;
  std::optional<double> timeout;
  std::string metrics_path;
  CLI::App* simc = app.add_subcommand("simulate", "distributed synchronization on a chain");
  add_roadmap(simc, com);
  robots(simc);
  simc->add_option("--eps", eps)->capture_default_str();
  simc->add_option("--dt", sim.dt)->capture_default_str()->check(CLI::PositiveNumber);
  simc->add_option("--sigma2", sim.sigma2, "motion noise variance")->capture_default_str();
  simc->add_option("--seed", sim.seed)->capture_default_str();
  simc->add_option("--fail", fails, "robot:start[:end], robot 1-based; repeatable");
  simc->add_option("--timeout", timeout, "silence before a stopped robot is declared failed");
  simc->add_option("--horizon", sim.horizon)->capture_default_str()->check(CLI::PositiveNumber);
  simc->add_option("--metrics", metrics_path, "per-epoch convergence and metrics JSON");
  output(simc, "trace CSV");
  simc->callback([&] {
    action = [&](Run& run) {
      const LoadedRoadmap r = load(run, com, err);
      const ChainRoadmap& chain = need_chain(r, "simulate");
      for (const std::string& f : fails) sim.failures.push_back(parse_failure(f));
      sim.detection_timeout = timeout;
      sim.eps = eps;
      run.seed = sim.seed;
      const Trace trace = simulate(chain, make_partition(chain, m, eps), sim);
      std::ostringstream csv;
      write_trace_csv(csv, trace);
      run.write(out_path, csv.str());
      if (!metrics_path.empty()) {
        json epochs = json::array();
        for (std::size_t k = 0; k < trace.epochs.size(); ++k) {
          const Epoch& e = trace.epochs[k];
          json ej = {{"start", e.start},
                     {"end", e.end},
                     {"robots", e.partition.nonempty_count()},
                     {"dimension", e.partition.dimension()}};
          const auto tc = convergence_time(trace, k);
          ej["convergence_time"] = tc ? json(*tc) : json(nullptr);
          if (tc) {
            const WindowMetrics w = evaluate_window(trace, chain, k, *tc, e.end);
            ej["metrics"] = metrics_report(w.refresh_time, w.latency, w.bounds);
          }
          epochs.push_back(std::move(ej));
        }
        run.write_json(metrics_path, {{"epochs", epochs}});
      }
      return kOk;
    };
  });

  // sweep
  SweepConfig sw;
  std::string variances = "0:0.5:0.02";
  std::optional<double> sweep_warmup;
  CLI::App* swc = app.add_subcommand("sweep", "noise sweep of the synchronization law");
  add_roadmap(swc, com);
  robots(swc);
  swc->add_option("--eps", eps)->capture_default_str();
  swc->add_option("--variances", variances, "start:stop:step or comma list")->capture_default_str();
  swc->add_option("--runs", sw.runs)->capture_default_str()->check(CLI::PositiveNumber);
  swc->add_option("--seed", sw.master_seed)->capture_default_str();
  swc->add_option("--dt", sw.dt)->capture_default_str()->check(CLI::PositiveNumber);
  swc->add_option("--horizon", sw.horizon)->capture_default_str()->check(CLI::PositiveNumber);
  swc->add_option("--warmup", sweep_warmup, "evaluation start (default horizon/3)");
  swc->add_option("--workers", sw.workers, "concurrent runs")->capture_default_str()->check(CLI::PositiveNumber);
  output(swc, "sweep CSV");
  swc->callback([&] {
    action = [&](Run& run) {
      const LoadedRoadmap r = load(run, com, err);
      const ChainRoadmap& chain = need_chain(r, "sweep");
      sw.variances = parse_variances(variances);
      sw.warmup = sweep_warmup;
      run.seed = sw.master_seed;
      std::ostringstream csv;
      write_sweep_csv(csv, noise_sweep(chain, make_partition(chain, m, eps), sw));
      run.write(out_path, csv.str());
      return kOk;
    };
  });

  // tree
  SearchLimits limits;
  CLI::App* tree = app.add_subcommand("tree", "optimal subtree collection on a tree roadmap");
  add_roadmap(tree, com);
  robots(tree);
  tree->add_option("--max-n", limits.max_vertices, "largest tree searched exhaustively")->capture_default_str();
  tree->add_option("--max-robots", limits.max_robots)->capture_default_str();
  output(tree, "plan JSON");
  tree->callback([&] {
    action = [&](Run& run) {
      const LoadedRoadmap r = load(run, com, err);
      run.write_json(out_path, to_json(r.graph, optimal_subtree_collection(r.graph, m, limits)));
      return kOk;
    };
  });

  // cover
  bool oracle = false;
  CLI::App* cov = app.add_subcommand("cover", "min-max path cover and its sweeping strategy");
  add_roadmap(cov, com);
  robots(cov);
  cov->add_flag("--oracle", oracle, "exact cover by exhaustive search (small instances)");
  output(cov, "cover JSON");
  cov->callback([&] {
    action = [&](Run& run) {
      const LoadedRoadmap r = load(run, com, err);
      const PathCover c = oracle ? exact_cover_oracle(r.graph, m) : minmax_path_cover(r.graph, m);
      json doc = to_json(r.graph, c);
      // Optimal refresh time is at least the optimal cover cost.
      json cert = {{"method", oracle ? "exact" : "threshold"},
                   {"refresh_time", 2.0 * c.cost},
                   {"optimal_refresh_time_lower_bound", c.lower_bound},
                   {"factor_bound", oracle ? 2.0 : 8.0}};
      cert["certified_ratio"] = c.lower_bound > 0.0 ? json(2.0 * c.cost / c.lower_bound) : json(nullptr);
      doc["certificate"] = cert;
      run.write_json(out_path, doc);
      return kOk;
    };
  });

  // chainify
  std::optional<std::size_t> chain_robots;
  CLI::App* chn = app.add_subcommand("chainify", "open spanning-tree tour of a roadmap as a chain");
  add_roadmap(chn, com);
  chn->add_option("-m,--robots", chain_robots, "also partition the chain for this many robots")
      ->check(CLI::PositiveNumber);
  chn->add_option("--eps", eps)->capture_default_str();
  output(chn, "chain JSON");
  chn->callback([&] {
    action = [&](Run& run) {
      const LoadedRoadmap r = load(run, com, err);
      const ChainifyResult c = chainify(r.graph);
      json doc = to_json(r.graph, c);
      if (chain_robots) {
        const double span = 2.0 * c.chain.length() + 1.0;
        const ChainApproximation a = chain_approximation(r.graph, *chain_robots, span, {.eps = eps});
        doc["partition"] = to_json(a.chainified.chain, a.partition);
        doc["certificate"] = to_json(a.certificate);
      }
      run.write_json(out_path, doc);
      return kOk;
    };
  });

  // rerun
  std::string rerun_manifest;
  CLI::App* re = app.add_subcommand("rerun", "repeat a command from its manifest and compare outputs");
  re->add_option("--manifest", rerun_manifest)->required();
  bool is_rerun = false;
  re->callback([&] { is_rerun = true; });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }

  try {
    if (is_rerun) return rerun(rerun_manifest, out, err);
    Run run;
    run.args = args;
    run.manifest = manifest;
    const CLI::App* sub = app.get_subcommands().front();
    run.command = sub->get_name();
    const int code = action(run);
    write_manifest(run, sub);
    return code;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }
}

}  // namespace patrol::cli
