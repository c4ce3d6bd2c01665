#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "ssc/closed_forms.hpp"
#include "ssc/exact_enum.hpp"
#include "ssc/growth.hpp"
#include "ssc/infinite_ff.hpp"
#include "ssc/io.hpp"
#include "ssc/meanfield.hpp"
#include "ssc/samplers.hpp"
#include "suites.hpp"

#ifndef SSC_VERSION
#define SSC_VERSION "unknown"
#endif

namespace ssc::cli {

namespace {

using nlohmann::json;
using io::CsvWriter;

// Artifact bookkeeping for one run; writes manifest.json on finish().
class Run {
 public:
  Run(const Common& c, std::string command, json config, bool needs_seed = true)
      : common_(c), command_(std::move(command)), config_(std::move(config)) {
    if (needs_seed && !c.seed) throw std::invalid_argument(command_ + ": --seed is required");
    std::filesystem::create_directories(c.output_dir);
  }

  std::uint64_t replica_seed(std::size_t i) const { return derive_seed(*common_.seed, i); }
  std::size_t workers() const { return common_.workers; }

  std::filesystem::path output(const std::string& name) {
    outputs_.push_back(name);
    return common_.output_dir / name;
  }
  void rows(const std::string& name, std::size_t n) { rows_[name] = n; }
  void cap_aborts(std::size_t n) { cap_aborts_ += n; }
  json& summary() { return summary_; }

  void finish() {
    json m;
    m["command"] = command_;
    m["version"] = SSC_VERSION;
    m["config"] = config_;
    if (common_.seed) {
      m["seed"] = *common_.seed;
      m["seed_derivation"] = "replica i uses derive_seed(seed, i): SplitMix64 finaliser of (seed, i)";
    }
    json outs = json::array();
    for (const auto& o : outputs_) {
      json e{{"file", o}};
      if (rows_.contains(o)) e["rows"] = rows_[o];
      outs.push_back(e);
    }
    m["outputs"] = outs;
    m["cap_aborts"] = cap_aborts_;
    m["partial"] = cap_aborts_ > 0;
    if (!summary_.is_null()) m["summary"] = summary_;
    std::ofstream f(common_.output_dir / "manifest.json");
    f << m.dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write manifest.json");
    if (cap_aborts_ > 0) std::cerr << "warning: " << cap_aborts_ << " replicas hit a size cap; outputs are partial\n";
  }

 private:
  Common common_;
  std::string command_;
  json config_;
  std::vector<std::string> outputs_;
  std::map<std::string, std::size_t> rows_;
  std::size_t cap_aborts_ = 0;
  json summary_;
};

template <class F>
auto per_replica(const Run& run, std::size_t replicas, F f) {
  return io::parallel_map(replicas, run.workers(), [&](std::size_t i) {
    Rng rng(run.replica_seed(i));
    return f(i, rng);
  });
}

std::string label_or_root(const FfhState& s, std::int32_t v) {
  auto l = s.label(v);
  return l.empty() ? "root" : l;
}

}  // namespace

// ---- exact-masses -------------------------------------------------------------

int exact_masses(const Common& c, const ExactMassesConfig& cfg) {
  if (cfg.n < 1 || cfg.n > kMaxEnumSize)
    throw std::invalid_argument("exact-masses: --n must be in 1.." + std::to_string(kMaxEnumSize));
  Run run(c, "exact-masses", {{"n", cfg.n}, {"cumulative", cfg.cumulative}}, false);
  const std::string name = "exact_masses.csv";
  CsvWriter csv(run.output(name));
  csv.header({"n", "code", "code_hex", "mass", "mass_decimal"});
  for (std::size_t n = cfg.cumulative ? 1 : cfg.n; n <= cfg.n; ++n)
    for (const auto& cls : tree_classes(n)) {
      csv.field(static_cast<std::uint64_t>(n)).field(cls.code).field(code_to_hex(cls.code));
      csv.field(to_string(cls.mass)).field(to_double(cls.mass));
      csv.end_row();
    }
  run.rows(name, csv.rows());
  run.finish();
  std::cout << "wrote " << csv.rows() << " classes to " << (c.output_dir / name).string() << '\n';
  return 0;
}

// ---- sample -------------------------------------------------------------------

int sample(const Common& c, const SampleConfig& cfg) {
  static const std::vector<std::string> tree_laws = {"rde", "genealogy", "mgw", "hx", "spinal", "given-size"};
  static const std::vector<std::string> scalar_laws = {"cluster-size", "t-inf", "theta1", "stationary-age"};
  const bool tree_law = std::ranges::find(tree_laws, cfg.law) != tree_laws.end();
  if (!tree_law && std::ranges::find(scalar_laws, cfg.law) == scalar_laws.end())
    throw std::invalid_argument("sample: unknown law '" + cfg.law + "'");
  if (cfg.cap < 1) throw std::invalid_argument("sample: --cap >= 1");
  if (cfg.law == "given-size" && cfg.k < 1) throw std::invalid_argument("sample: --k >= 1");
  if ((cfg.law == "hx" || cfg.law == "spinal") && !(cfg.x >= 0.0)) throw std::invalid_argument("sample: --x >= 0");
  Run run(c, "sample",
          {{"law", cfg.law}, {"replicas", cfg.replicas}, {"cap", cfg.cap}, {"x", cfg.x}, {"k", cfg.k},
           {"max_spine", cfg.max_spine}});
  const std::string name = "samples.csv";
  CsvWriter csv(run.output(name));
  std::size_t aborts = 0;
  if (tree_law) {
    struct Row {
      bool capped = false;
      std::size_t size = 0, height = 0, root_degree = 0;
      std::optional<double> root_age;
      std::string code_hex;
    };
    const auto rows = per_replica(run, cfg.replicas, [&](std::size_t, Rng& rng) {
      std::optional<RootedTree> tree;
      std::optional<double> root_age;
      bool capped = false;
      auto take = [&](const std::optional<AgedTree>& a) {
        if (!a) return;
        tree = a->tree;
        root_age = a->vertex_age[a->tree.root];
      };
      MgwOptions mo;
      mo.cap = cfg.cap;
      if (cfg.law == "rde") {
        tree = sample_rde(rng, cfg.cap);
      } else if (cfg.law == "genealogy") {
        const auto g = sample_genealogy_pair(rng, cfg.cap);
        if (g) take(g->cluster);
      } else if (cfg.law == "mgw") {
        take(sample_mgw(rng, mo));
      } else if (cfg.law == "hx") {
        take(sample_hx(cfg.x, rng, mo));
      } else if (cfg.law == "spinal") {
        SpinalOptions so;
        so.cap = cfg.cap;
        so.max_spine = cfg.max_spine;
        const auto st = sample_spinal(cfg.x, rng, so);
        take(st.aged);
        capped = st.truncated;
      } else {
        take(sample_cluster_given_size(cfg.k, rng));
      }
      Row r;
      if (!tree) {
        r.capped = true;
        return r;
      }
      r.capped = capped;
      r.size = tree->size();
      r.height = ssc::height(*tree);
      r.root_degree = degree(*tree, tree->root);
      r.root_age = root_age;
      if (r.size <= kMaxEnumSize) r.code_hex = code_to_hex(canonical_code(*tree));
      return r;
    });
    csv.header({"replica", "seed", "capped", "size", "height", "root_degree", "root_age", "code_hex"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      aborts += r.capped;
      csv.field(static_cast<std::uint64_t>(i)).field(run.replica_seed(i)).field(r.capped);
      if (r.size == 0) {
        csv.field("").field("").field("").field("").field("");
      } else {
        csv.field(static_cast<std::uint64_t>(r.size)).field(static_cast<std::uint64_t>(r.height));
        csv.field(static_cast<std::uint64_t>(r.root_degree));
        if (r.root_age) csv.field(*r.root_age);
        else csv.field("");
        csv.field(r.code_hex);
      }
      csv.end_row();
    }
  } else {
    const auto values = per_replica(run, cfg.replicas, [&](std::size_t, Rng& rng) -> double {
      if (cfg.law == "cluster-size") return static_cast<double>(sample_cluster_size(rng));
      if (cfg.law == "t-inf") return sample_t_inf(rng);
      if (cfg.law == "theta1") return sample_explosion_time(sample_cluster_size(rng), rng);
      return sample_stationary_age(rng);
    });
    csv.header({"replica", "seed", "value"});
    for (std::size_t i = 0; i < values.size(); ++i) {
      csv.field(static_cast<std::uint64_t>(i)).field(run.replica_seed(i)).field(values[i]);
      csv.end_row();
    }
  }
  run.rows(name, csv.rows());
  run.cap_aborts(aborts);
  run.finish();
  std::cout << "wrote " << csv.rows() << " samples of " << cfg.law << " to " << (c.output_dir / name).string()
            << '\n';
  return 0;
}

// ---- growth -------------------------------------------------------------------

int growth(const Common& c, const GrowthConfig& cfg) {
  if (cfg.mode != "singleton" && cfg.mode != "stationary")
    throw std::invalid_argument("growth: --mode must be singleton or stationary");
  if (cfg.cap < 1 || cfg.init_size < 1) throw std::invalid_argument("growth: --cap and --init-size must be >= 1");
  if (cfg.leap < 0.0) throw std::invalid_argument("growth: --leap >= 0");
  json config{{"mode", cfg.mode},         {"replicas", cfg.replicas}, {"cap", cfg.cap},
              {"init_size", cfg.init_size}, {"window", cfg.window},   {"tau", cfg.tau},
              {"leap", cfg.leap}};
  config["horizon"] = cfg.horizon ? json(*cfg.horizon) : json(nullptr);
  Run run(c, "growth", config);

  if (!cfg.tau.empty()) {
    auto tau = cfg.tau;
    std::sort(tau.begin(), tau.end());
    ScalingOptions so;
    so.leap_tolerance = cfg.leap;
    const auto stats = per_replica(run, cfg.replicas,
                                   [&](std::size_t, Rng& rng) { return sample_scaling_statistics(rng, tau, so); });
    const std::string name = "growth_scaling.csv";
    CsvWriter csv(run.output(name));
    csv.header({"replica", "seed", "tau", "statistic"});
    for (std::size_t i = 0; i < stats.size(); ++i)
      for (std::size_t j = 0; j < tau.size(); ++j) {
        csv.field(static_cast<std::uint64_t>(i)).field(run.replica_seed(i)).field(tau[j]).field(stats[i][j]);
        csv.end_row();
      }
    run.rows(name, csv.rows());
    run.finish();
    std::cout << "wrote " << csv.rows() << " scaling statistics to " << (c.output_dir / name).string() << '\n';
    return 0;
  }

  const auto traces = per_replica(run, cfg.replicas, [&](std::size_t, Rng& rng) {
    if (cfg.mode == "stationary") {
      StationaryOptions so;
      so.window = cfg.window;
      so.size_cap = cfg.cap;
      return run_stationary(rng, so);
    }
    GrowthOptions go;
    go.init_size = cfg.init_size;
    go.size_cap = cfg.cap;
    if (cfg.horizon) {
      go.stop = StopRule::horizon;
      go.horizon = *cfg.horizon;
    }
    return run_growth(rng, go);
  });
  const std::string ev = "growth_events.csv", sm = "growth_summary.csv";
  CsvWriter events(run.output(ev)), summary(run.output(sm));
  events.header({"replica", "time", "kind", "jump_size", "size_after"});
  summary.header({"replica", "seed", "t_begin", "t_end", "initial_size", "jumps", "explosions", "first_explosion",
                  "capped"});
  std::size_t capped = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& tr = traces[i];
    std::size_t jumps = 0;
    for (const auto& e : tr.events) {
      jumps += e.kind == EventKind::jump;
      events.field(static_cast<std::uint64_t>(i)).field(e.time);
      events.field(e.kind == EventKind::jump ? "jump" : "explosion");
      events.field(e.jump_size).field(e.size_after);
      events.end_row();
    }
    capped += tr.capped;
    summary.field(static_cast<std::uint64_t>(i)).field(run.replica_seed(i)).field(tr.t_begin).field(tr.t_end);
    summary.field(tr.initial_size).field(static_cast<std::uint64_t>(jumps));
    summary.field(static_cast<std::uint64_t>(tr.explosions.size()));
    if (tr.explosions.empty()) summary.field("");
    else summary.field(tr.explosions.front());
    summary.field(tr.capped);
    summary.end_row();
  }
  run.rows(ev, events.rows());
  run.rows(sm, summary.rows());
  // a capped trace keeps exact explosion times; only the path past the cap is missing
  run.summary()["capped_traces"] = capped;
  run.finish();
  std::cout << "wrote " << summary.rows() << " traces (" << events.rows() << " events) to "
            << c.output_dir.string() << '\n';
  return 0;
}

// ---- conditioned ----------------------------------------------------------------

int conditioned(const Common& c, const ConditionedConfig& cfg) {
  ConditionalKernel kern;
  kern.s = cfg.s;
  kern.t = cfg.t;
  kern.stationary = cfg.stationary;
  if (cfg.mode == "explode_at") kern.mode = ConditionMode::explode_at;
  else if (cfg.mode == "survive_past") kern.mode = ConditionMode::survive_past;
  else throw std::invalid_argument("conditioned: --mode must be explode_at or survive_past");
  validate(kern);
  Run run(c, "conditioned",
          {{"s", cfg.s}, {"t", cfg.t}, {"mode", cfg.mode}, {"stationary", cfg.stationary},
           {"replicas", cfg.replicas}, {"cap", cfg.cap}});
  ConditionedOptions co;
  co.size_cap = cfg.cap;
  const auto sizes = per_replica(run, cfg.replicas, [&](std::size_t, Rng& rng) {
    return run_conditioned(rng, kern, co).size_at(kern.s);
  });
  const std::string name = "conditioned.csv", pmf_name = "conditioned_pmf.csv";
  CsvWriter csv(run.output(name));
  csv.header({"replica", "seed", "size_at_s", "capped"});
  std::size_t aborts = 0;
  std::uint64_t largest = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    csv.field(static_cast<std::uint64_t>(i)).field(run.replica_seed(i));
    if (sizes[i]) {
      csv.field(*sizes[i]).field(false);
      largest = std::max(largest, *sizes[i]);
      sum += static_cast<double>(*sizes[i]);
    } else {
      csv.field("").field(true);
      ++aborts;
    }
    csv.end_row();
  }
  const auto table = conditioned_size_pmf_table(kern);
  std::vector<std::uint64_t> counts(largest + 1, 0);
  for (const auto& s : sizes)
    if (s) ++counts[*s];
  CsvWriter pmf(run.output(pmf_name));
  pmf.header({"k", "exact", "empirical"});
  const std::size_t kmax = std::max<std::size_t>(largest, std::min<std::size_t>(table.pmf.size(), 50));
  const std::size_t observed = sizes.size() - aborts;
  for (std::size_t k = 1; k <= kmax; ++k) {
    pmf.field(static_cast<std::uint64_t>(k));
    pmf.field(k <= table.pmf.size() ? table.pmf[k - 1] : conditioned_size_pmf(k, kern));
    if (observed) pmf.field(k < counts.size() ? double(counts[k]) / double(observed) : 0.0);
    else pmf.field("");
    pmf.end_row();
  }
  run.rows(name, csv.rows());
  run.rows(pmf_name, pmf.rows());
  run.cap_aborts(aborts);
  run.summary()["expected_size"] = conditional_expected_size(kern);
  run.summary()["empirical_mean"] = observed ? json(sum / double(observed)) : json(nullptr);
  run.finish();
  std::cout << "wrote " << csv.rows() << " conditioned sizes to " << (c.output_dir / name).string() << '\n';
  return 0;
}

// ---- meanfield ------------------------------------------------------------------

int meanfield(const Common& c, const MeanfieldConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("meanfield: --n >= 1");
  const double lambda = cfg.lambda.value_or(1.0 / std::sqrt(static_cast<double>(cfg.n)));
  if (!(lambda >= 0.0)) throw std::invalid_argument("meanfield: --lambda >= 0");
  if (!(cfg.horizon >= 0.0)) throw std::invalid_argument("meanfield: --horizon >= 0");
  auto snaps = cfg.snapshots.empty() ? std::vector<double>{cfg.horizon} : cfg.snapshots;
  std::sort(snaps.begin(), snaps.end());
  if (snaps.front() < 0.0 || snaps.back() > cfg.horizon)
    throw std::invalid_argument("meanfield: snapshot times must lie in [0, horizon]");
  Run run(c, "meanfield",
          {{"n", cfg.n}, {"lambda", lambda}, {"horizon", cfg.horizon}, {"snapshots", snaps},
           {"replicas", cfg.replicas}});
  const auto runs = per_replica(run, cfg.replicas, [&](std::size_t, Rng& rng) {
    MfOptions o;
    o.horizon = cfg.horizon;
    o.snapshot_times = snaps;
    return mf_run(cfg.n, lambda, rng, o);
  });
  const std::string sn = "meanfield_snapshots.csv", sz = "meanfield_sizes.csv";
  CsvWriter snap(run.output(sn)), sizes(run.output(sz));
  snap.header({"replica", "seed", "time", "sup_distance", "edges", "largest", "burns", "proposals", "rejected"});
  sizes.header({"replica", "time", "k", "v_k", "w_k"});
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    for (const auto& s : r.snapshots) {
      snap.field(static_cast<std::uint64_t>(i)).field(run.replica_seed(i)).field(s.time).field(s.sup_distance);
      snap.field(static_cast<std::uint64_t>(s.edges)).field(static_cast<std::uint64_t>(s.largest));
      snap.field(static_cast<std::uint64_t>(r.burns)).field(static_cast<std::uint64_t>(r.proposals));
      snap.field(static_cast<std::uint64_t>(r.rejected));
      snap.end_row();
      for (std::size_t k = 1; k <= s.v.size(); ++k) {
        if (s.v[k - 1] == 0.0 && k > 20) continue;
        sizes.field(static_cast<std::uint64_t>(i)).field(s.time).field(static_cast<std::uint64_t>(k));
        sizes.field(s.v[k - 1]).field(cluster_size_pmf_real(k));
        sizes.end_row();
      }
    }
  }
  run.rows(sn, snap.rows());
  run.rows(sz, sizes.rows());
  run.finish();
  std::cout << "wrote " << snap.rows() << " snapshots to " << (c.output_dir / sn).string() << '\n';
  return 0;
}

// ---- ffh --------------------------------------------------------------------------

int ffh(const Common& c, const FfhConfig& cfg) {
  if (!(cfg.horizon >= 0.0)) throw std::invalid_argument("ffh: --horizon >= 0");
  Run run(c, "ffh", {{"h", cfg.h}, {"horizon", cfg.horizon}, {"replicas", cfg.replicas}});
  struct Out {
    std::optional<FfhState> state;
    std::vector<FireEvent> fires;
  };
  const auto outs = io::parallel_map(cfg.replicas, run.workers(), [&](std::size_t i) {
    Out o;
    try {
      o.state = ffh_init(cfg.h, run.replica_seed(i), cfg.horizon);
    } catch (const std::runtime_error&) {
      return o;  // an H sample exceeded its cap
    }
    o.fires = ffh_run(*o.state, cfg.horizon);
    return o;
  });
  const std::string fn = "ffh_fires.csv", sn = "ffh_snapshot.json";
  CsvWriter fires(run.output(fn));
  fires.header({"replica", "t", "igniting_leaf", "component_size", "root_burned"});
  json snapshot{{"h", cfg.h}, {"time", cfg.horizon}, {"replicas", json::array()}};
  std::size_t aborts = 0, root_burns = 0;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const auto& o = outs[i];
    if (!o.state) {
      ++aborts;
      snapshot["replicas"].push_back({{"replica", i}, {"seed", run.replica_seed(i)}, {"aborted", true}});
      continue;
    }
    const auto& s = *o.state;
    for (const auto& f : o.fires) {
      root_burns += f.root_burned;
      fires.field(static_cast<std::uint64_t>(i)).field(f.time).field(label_or_root(s, f.leaf));
      fires.field(static_cast<std::uint64_t>(f.size)).field(f.root_burned);
      fires.end_row();
    }
    json verts = json::array();
    for (const auto v : s.live_component(0)) {
      const auto& x = s.vertices[v];
      json j{{"label", label_or_root(s, v)}, {"depth", x.depth()}, {"age", s.vertex_age(v)}};
      j["parent"] = x.parent >= 0 && s.edge_live(v, s.clock) ? json(label_or_root(s, x.parent)) : json(nullptr);
      verts.push_back(j);
    }
    snapshot["replicas"].push_back({{"replica", i},
                                    {"seed", run.replica_seed(i)},
                                    {"materialised_vertices", s.vertices.size()},
                                    {"root_cluster", verts}});
  }
  std::ofstream(run.output(sn)) << snapshot.dump(2) << '\n';
  run.rows(fn, fires.rows());
  run.cap_aborts(aborts);
  run.summary()["fires"] = fires.rows();
  run.summary()["root_burns"] = root_burns;
  run.finish();
  std::cout << "wrote " << fires.rows() << " fires to " << (c.output_dir / fn).string() << '\n';
  return 0;
}

// ---- verify -------------------------------------------------------------------------

int verify(const Common& c, const VerifyConfig& cfg) {
  std::vector<int> ids;
  if (cfg.suite == "all") {
    for (int i = 1; i <= suites::kCriterionCount; ++i) ids.push_back(i);
  } else if (const auto id = suites::criterion_for_suite(cfg.suite)) {
    ids.push_back(*id);
  } else {
    std::string names;
    for (const auto& n : suites::suite_names()) names += " " + n;
    throw std::invalid_argument("verify: unknown suite '" + cfg.suite + "' (all" + names + ")");
  }
  Run run(c, "verify", {{"suite", cfg.suite}});
  suites::SuiteOptions so;
  so.seed = *c.seed;
  so.workers = c.workers;
  const std::string md = "verify_report.md", jl = "verify_reports.jsonl";
  std::ofstream report(run.output(md)), lines(run.output(jl));
  report << "# Verification report\n\nseed " << *c.seed << ", version " << SSC_VERSION << "\n";
  bool ok = true;
  json results = json::array();
  for (int id : ids) {
    const auto r = suites::run_criterion(id, so);
    suites::print_result(std::cout, r);
    const bool good = r.pass || !r.gating;
    ok = ok && good;
    results.push_back({{"criterion", id}, {"suite", r.suite}, {"pass", r.pass}, {"gating", r.gating}});
    report << "\n## c" << (id < 10 ? "0" : "") << id << ' ' << r.suite << ": " << r.title << " - "
           << (r.pass ? "PASS" : (r.gating ? "FAIL" : "FLAG")) << "\n\n";
    std::vector<TestReport> reps;
    for (const auto& ch : r.checks) {
      reps.push_back(ch.report);
      lines << to_json_line(ch.report) << '\n';
    }
    write_markdown(report, reps);
    if (!r.lines.empty()) {
      report << '\n';
      for (const auto& l : r.lines) report << "- " << l << '\n';
    }
  }
  run.summary()["criteria"] = results;
  run.summary()["pass"] = ok;
  run.finish();
  return ok ? 0 : 1;
}

}  // namespace ssc::cli
