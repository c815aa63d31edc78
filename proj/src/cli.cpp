#include "spinref/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinref/analysis.hpp"
#include "spinref/polymer.hpp"

namespace spinref {

using Json = nlohmann::ordered_json;

namespace {

struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

PipelineMode parse_mode(const std::string& s) {
  if (s == "direct") return PipelineMode::BinomialDirect;
  if (s == "blocks") return PipelineMode::ShuffledBlocks;
  throw std::invalid_argument("unknown mode '" + s + "' (expected direct or blocks)");
}

InitialPermutation parse_initial(const std::string& s) {
  if (s == "auto") return InitialPermutation::Auto;
  if (s == "none") return InitialPermutation::None;
  if (s == "uniform") return InitialPermutation::Uniform;
  if (s == "stride") return InitialPermutation::Stride;
  throw std::invalid_argument("unknown initial permutation '" + s + "'");
}

std::string bits_text(std::span<const Bit> bits) {
  std::string s;
  for (Bit b : bits) s.push_back(b ? '1' : '0');
  return s;
}

void emit(const ExperimentConfig& cfg, std::ostream& out, const std::string& content) {
  if (cfg.out.empty()) {
    out << content;
  } else {
    write_file(cfg.out, content);
  }
}

PipelineConfig pipeline_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  PipelineConfig pc;
  pc.model.kind = cfg.model;
  pc.model.epsilon = cfg.epsilon;
  pc.model.ell = cfg.ell;
  pc.n = cfg.n;
  pc.seed = seed;
  pc.mode = cfg.mode;
  pc.initial = cfg.initial;
  pc.phase1.target_bias = cfg.target_bias;
  pc.phase2.alpha = cfg.alpha;
  return pc;
}

/// Runs fn(i) for i in [0, count) on up to `jobs` threads.
template <class F>
void parallel_for(std::size_t count, std::size_t jobs, F&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Commands -------------------------------------------------------------------

int cmd_pipeline(const ExperimentConfig& cfg, std::ostream& out) {
  std::vector<PipelineResult> results(cfg.trials);
  parallel_for(cfg.trials, cfg.jobs, [&](std::size_t i) { results[i] = pipeline(pipeline_config(cfg, cfg.seed + i)); });

  bool ok = true;
  Json ledgers = Json::array();
  Json trials = Json::array();
  std::string csv = kRecordHeader;
  csv += '\n';
  for (std::size_t i = 0; i < results.size(); ++i) {
    const PipelineResult& r = results[i];
    ok = ok && r.ledger.within_cap();
    std::string body = records_csv(r.records);
    csv += body.substr(body.find('\n') + 1);
    Json t;
    t["seed"] = cfg.seed + i;
    t["clean_bits"] = r.clean_bits;
    t["ones_out"] = r.ones_out;
    t["blocks"] = r.blocks;
    t["steps"] = {{"initial_permutation", r.steps.initial_permutation},
                  {"phase1", r.steps.phases[0]},
                  {"phase2", r.steps.phases[1]},
                  {"phase3", r.steps.phases[2]},
                  {"gather", r.steps.gather},
                  {"total", r.steps.total()}};
    t["records"] = Json::parse(records_json(r.records));
    t["ledger"] = Json::parse(r.ledger.to_json());
    Json l = Json::parse(r.ledger.to_json());
    l["seed"] = cfg.seed + i;
    ledgers.push_back(l);
    trials.push_back(std::move(t));
  }
  if (cfg.format == ReportFormat::Csv) {
    emit(cfg, out, csv);
    if (!cfg.out.empty()) write_file(cfg.out + ".ledger.json", ledgers.dump(2) + "\n");
  } else {
    Json j;
    j["n"] = cfg.n;
    j["epsilon"] = cfg.epsilon;
    j["model"] = to_string(cfg.model);
    j["trials"] = trials;
    emit(cfg, out, j.dump(2) + "\n");
  }
  if (!ok) throw CheckFailed("clean bits exceed the entropy cap");
  return 0;
}

int cmd_phase(const ExperimentConfig& cfg, int which, std::ostream& out) {
  BiasModel model{cfg.model, cfg.epsilon, cfg.ell};
  Bits bits = sample(model, cfg.n, cfg.seed);
  std::vector<RoundRecord> recs;
  double delta = delta_from_bias(cfg.epsilon);
  if (which == 1) {
    recs = phase1_run(bits, cfg.epsilon, Phase1Config{cfg.target_bias, std::nullopt});
  } else if (which == 2) {
    Phase2Schedule sched;
    sched.alpha = cfg.alpha;
    recs = phase2_run(bits, delta, static_cast<double>(cfg.n), sched, cfg.seed);
  } else {
    recs = phase3_run(bits, delta, cfg.n, cfg.seed);
  }
  emit(cfg, out, write_report(recs, nullptr, cfg.format));
  return 0;
}

int cmd_analyze(const ExperimentConfig& cfg, std::ostream& out) {
  const auto fwd = forward_orbit(cfg.epsilon, cfg.target_bias);
  const auto back = backward_orbit(cfg.target_bias, fwd.size() - 1);
  if (cfg.format == ReportFormat::Csv) {
    emit(cfg, out, orbit_csv(fwd, "epsilon_i") + "\n" + orbit_csv(back, "epsilon_i"));
    return 0;
  }
  const double n = static_cast<double>(cfg.n);
  Json j;
  j["epsilon"] = cfg.epsilon;
  j["target_bias"] = cfg.target_bias;
  j["phase1"] = {{"rounds", fwd.size() - 1},
                 {"forward", fwd},
                 {"backward", back},
                 {"overhead_squared", std::pow(phase1_overhead(cfg.epsilon, cfg.target_bias), 2)},
                 {"tail_product", phase1_tail_product(cfg.target_bias)},
                 {"low_region_bound", phase1_low_region_bound()}};
  Json regions = Json::array();
  for (int r = 1; r <= 4; ++r) regions.push_back({{"region", r}, {"floor", phase2_region_floor(r)}, {"worst", phase2_region_worst(r)}});
  const auto st = phase2_stationary(n);
  j["phase2"] = {{"regions", regions}, {"delta_star", st.delta_star}, {"halt", st.halt}};
  if (cfg.n >= 64) {
    const auto cert = phase3_certify(cfg.n);
    j["phase3"] = {{"block_size", phase3_block_size(cfg.n)},
                   {"iterations", cert.iterations},
                   {"reached", cert.reached},
                   {"first_loss_factor", cert.first_loss_factor},
                   {"required_loss_factor", cert.required_loss_factor}};
  }
  j["ledger"] = Json::parse(yield_ledger(cfg.epsilon, n, 0).to_json());
  j["entropy_cap"] = entropy_cap(n, cfg.epsilon);
  j["epsilon_thermal_default"] = epsilon_thermal(PolarizationParams{});
  emit(cfg, out, j.dump(2) + "\n");
  return 0;
}

int cmd_arch(const ExperimentConfig& cfg, const std::string& pattern, std::size_t periods, std::ostream& out) {
  Json j;
  j["pattern"] = pattern;
  j["periods"] = periods;
  bool ok = true;
  if (pattern == "ABCD") {
    const PolymerSpec spec = abcd_spec(periods);
    const PulseSequence seq = two_tape_rotate_seq();
    const Permutation perm = induced_permutation(spec, seq);
    bool bd_fixed = true, a_adv = true, c_back = true;
    for (std::size_t i = 0; i < periods; ++i) {
      bd_fixed = bd_fixed && perm[spec.position('B', i)] == spec.position('B', i) &&
                 perm[spec.position('D', i)] == spec.position('D', i);
      a_adv = a_adv && perm[spec.position('A', i)] == spec.position('A', i + 1);
      c_back = c_back && perm[spec.position('C', i)] == spec.position('C', i + periods - 1);
    }
    Permutation power = identity_permutation(spec.size());
    for (std::size_t i = 0; i < periods; ++i) power = compose(power, perm);
    const bool cycle_back = power == identity_permutation(spec.size());
    j["sequence"] = seq.to_text();
    j["b_d_fixed"] = bd_fixed;
    j["a_advances"] = a_adv;
    j["c_advances"] = c_back;
    j["periods_fold_identity"] = cycle_back;
    ok = bd_fixed && a_adv && c_back && cycle_back;
  } else if (pattern == "ABC") {
    const PolymerSpec spec = abc_spec(periods);
    const Permutation perm = induced_permutation(spec, abc_rotate_seq());
    bool map_ok = true;
    for (std::size_t i = 0; i < periods; ++i) {
      map_ok = map_ok && perm[spec.position('A', i)] == spec.position('C', i) &&
               perm[spec.position('B', i)] == spec.position('B', i + periods - 1) &&
               perm[spec.position('C', i)] == spec.position('A', i + 1);
    }
    const RealizedShift shift = realize_abstract_shift(spec);
    const Permutation step = induced_permutation(spec, shift.seq);
    Permutation power = identity_permutation(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) power = compose(power, step);
    const bool n_fold = power == identity_permutation(spec.size());
    j["track_map"] = map_ok;
    j["tracks"] = track_decomposition(perm).size();
    j["shift_sequence"] = shift.seq.to_text();
    j["shift_single_cycle"] = track_decomposition(step).size() == 1;
    j["n_fold_identity"] = n_fold;
    ok = map_ok && n_fold;
  } else {
    throw std::invalid_argument("arch: pattern must be ABC or ABCD");
  }
  j["ok"] = ok;
  if (cfg.format == ReportFormat::Json) {
    emit(cfg, out, j.dump(2) + "\n");
  } else {
    std::string s = "key,value\n";
    for (auto& [k, v] : j.items()) {
      if (v.is_string()) continue;
      s += k + "," + v.dump() + "\n";
    }
    emit(cfg, out, s);
  }
  if (!ok) throw CheckFailed("architecture check failed");
  return 0;
}

int cmd_equiv(const ExperimentConfig& cfg, std::ostream& out) {
  const auto suite = equivalence_suite(cfg.seed);
  Json arr = Json::array();
  bool ok = true;
  std::string csv = "name,mode,cases,mismatches,witness\n";
  for (const auto& [name, rep] : suite) {
    Json j = Json::parse(rep.to_json());
    j["name"] = name;
    arr.push_back(j);
    ok = ok && rep.agree();
    csv += name + "," + (rep.exhaustive ? "exhaustive" : "sampled") + "," + std::to_string(rep.cases) + "," +
           std::to_string(rep.mismatches) + "," + (rep.witness ? bits_text(*rep.witness) : "") + "\n";
  }
  emit(cfg, out, cfg.format == ReportFormat::Json ? arr.dump(2) + "\n" : csv);
  if (!ok) throw CheckFailed("compiled program disagrees with the abstract round");
  return 0;
}

int cmd_bench(const ExperimentConfig& cfg, unsigned min_power, unsigned max_power, std::ostream& out) {
  if (min_power < 2 || max_power < min_power + 3) throw std::invalid_argument("bench needs at least 4 sizes");
  std::vector<std::size_t> sizes;
  for (unsigned p = min_power; p <= max_power; ++p) sizes.push_back(static_cast<std::size_t>(std::pow(3, p)));
  const Architecture archs[] = {Architecture::SingleTape, Architecture::TwoTape, Architecture::TwoTapeCA};
  std::vector<std::array<double, 3>> steps(sizes.size());
  parallel_for(sizes.size(), cfg.jobs, [&](std::size_t i) {
    ExperimentConfig c = cfg;
    c.n = sizes[i];
    c.mode = PipelineMode::ShuffledBlocks;
    c.initial = InitialPermutation::Uniform;
    const PipelineResult single = pipeline(pipeline_config(c, cfg.seed));
    c.initial = InitialPermutation::Auto;
    const PipelineResult strided = pipeline(pipeline_config(c, cfg.seed));
    steps[i][0] = static_cast<double>(architecture_steps(archs[0], single, sizes[i]).total());
    steps[i][1] = static_cast<double>(architecture_steps(archs[1], strided, sizes[i]).total());
    steps[i][2] = static_cast<double>(architecture_steps(archs[2], strided, sizes[i]).total());
  });
  std::vector<double> xs(sizes.begin(), sizes.end());
  Json j;
  Json points = Json::array();
  std::string csv = "arch,n,steps\n";
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      csv += to_string(archs[a]) + "," + std::to_string(sizes[i]) + "," + format_double(steps[i][a]) + "\n";
      points.push_back({{"arch", to_string(archs[a])}, {"n", sizes[i]}, {"steps", steps[i][a]}});
    }
  }
  csv += "\narch,slope\n";
  Json slopes;
  for (std::size_t a = 0; a < 3; ++a) {
    std::vector<double> ys;
    for (const auto& s : steps) ys.push_back(s[a]);
    const double slope = runtime_exponent(xs, ys);
    csv += to_string(archs[a]) + "," + format_double(slope) + "\n";
    slopes[to_string(archs[a])] = slope;
  }
  j["epsilon"] = cfg.epsilon;
  j["points"] = points;
  j["slopes"] = slopes;
  emit(cfg, out, cfg.format == ReportFormat::Json ? j.dump(2) + "\n" : csv);
  return 0;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n < 2) throw std::invalid_argument("--n must be at least 2");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("--epsilon must lie in [0, 1]");
  if (!(ell >= 1.0)) throw std::invalid_argument("--ell must be at least 1");
  if (trials == 0) throw std::invalid_argument("--trials must be positive");
  if (!(target_bias > 0.0 && target_bias < 1.0)) throw std::invalid_argument("--target-bias must lie in (0, 1)");
  if (!(alpha > 0.2 && alpha <= 0.32)) throw std::invalid_argument("--alpha must lie in (0.2, 0.32]");
  if (jobs == 0) throw std::invalid_argument("--jobs must be positive");
}

std::vector<NamedReport> equivalence_suite(std::uint64_t seed) {
  std::vector<NamedReport> out;
  EquivalenceOptions opts;
  opts.seed = seed;
  auto p1 = [](std::span<const Bit> b) { return phase1_round(b).bits; };
  out.push_back({"phase1_n8", equivalence_check(compile_phase1(8), p1, 8, opts)});
  out.push_back({"phase1_n64", equivalence_check(compile_phase1(64), p1, 64, opts)});
  auto p2 = [](std::span<const Bit> b) { return phase2_bins(b, 3).bits; };
  out.push_back({"phase2_n12_k3", equivalence_check(compile_phase2_round(12, 3), p2, 12, opts)});
  auto p3 = [](std::span<const Bit> b) { return phase3_blocks(b, 8).bits; };
  EquivalenceOptions clean_head = opts;
  clean_head.domain = [](std::span<const Bit> b) { return b[0] == 0 && b[1] == 0 && b[2] == 0; };
  out.push_back({"phase3_n8_k8", equivalence_check(compile_phase3_round(8, 8), p3, 8, clean_head)});
  return out;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Algorithmic cooling simulator", "spinref"};
  app.require_subcommand(1);
  app.fallthrough();

  ExperimentConfig cfg;
  if (const char* env = std::getenv("SPINREF_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "SPINREF_SEED is not a number\n";
      return 1;
    }
  }
  std::string model = "binomial", format = "csv", mode = "direct", initial = "auto", config_path;
  std::map<std::string, CLI::Option*> opts;
  opts["n"] = app.add_option("--n", cfg.n, "number of bits");
  opts["epsilon"] = app.add_option("--epsilon", cfg.epsilon, "initial bias");
  opts["model"] = app.add_option("--model", model, "binomial or markov");
  opts["ell"] = app.add_option("--ell", cfg.ell, "correlation distance");
  opts["seed"] = app.add_option("--seed", cfg.seed, "base seed");
  opts["trials"] = app.add_option("--trials", cfg.trials, "number of seeded trials");
  opts["target_bias"] = app.add_option("--target-bias,--target", cfg.target_bias, "phase-1 stop bias");
  opts["alpha"] = app.add_option("--alpha", cfg.alpha, "phase-2 endgame exponent");
  opts["format"] = app.add_option("--format", format, "csv or json");
  opts["out"] = app.add_option("--out", cfg.out, "output path (stdout if omitted)");
  opts["jobs"] = app.add_option("--jobs", cfg.jobs, "worker threads");
  opts["mode"] = app.add_option("--mode", mode, "direct or blocks");
  opts["initial"] = app.add_option("--initial", initial, "auto, none, uniform or stride");
  app.add_option("--config", config_path, "JSON file with option values");

  auto* pipeline_cmd = app.add_subcommand("pipeline", "full three-phase run");
  auto* phase_cmd = app.add_subcommand("phase", "run a single phase");
  int phase_id = 1;
  phase_cmd->add_option("which", phase_id, "1, 2 or 3")->required()->check(CLI::Range(1, 3));
  auto* analyze_cmd = app.add_subcommand("analyze", "recurrence orbits and bounds");
  auto* arch_cmd = app.add_subcommand("arch", "pulse-sequence permutation report");
  std::string pattern = "ABCD";
  std::size_t periods = 3;
  arch_cmd->add_option("--pattern", pattern, "ABC or ABCD");
  arch_cmd->add_option("--periods", periods, "number of periods");
  auto* equiv_cmd = app.add_subcommand("equiv", "compiled-vs-abstract equivalence suite");
  auto* bench_cmd = app.add_subcommand("bench", "step-count scaling and fitted exponents");
  unsigned min_power = 6, max_power = 9;
  bench_cmd->add_option("--min-power", min_power, "smallest size as a power of 3");
  bench_cmd->add_option("--max-power", max_power, "largest size as a power of 3");

  std::vector<std::string> argv_store{"spinref"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw std::invalid_argument("cannot read config '" + config_path + "'");
      Json j;
      try {
        j = Json::parse(f);
      } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
      }
      // Values from the file apply only where no flag was given.
      std::map<std::string, std::function<void(const Json&)>> setters{
          {"n", [&](const Json& v) { cfg.n = v.get<std::size_t>(); }},
          {"epsilon", [&](const Json& v) { cfg.epsilon = v.get<double>(); }},
          {"model", [&](const Json& v) { model = v.get<std::string>(); }},
          {"ell", [&](const Json& v) { cfg.ell = v.get<double>(); }},
          {"seed", [&](const Json& v) { cfg.seed = v.get<std::uint64_t>(); }},
          {"trials", [&](const Json& v) { cfg.trials = v.get<std::size_t>(); }},
          {"target_bias", [&](const Json& v) { cfg.target_bias = v.get<double>(); }},
          {"alpha", [&](const Json& v) { cfg.alpha = v.get<double>(); }},
          {"format", [&](const Json& v) { format = v.get<std::string>(); }},
          {"out", [&](const Json& v) { cfg.out = v.get<std::string>(); }},
          {"jobs", [&](const Json& v) { cfg.jobs = v.get<std::size_t>(); }},
          {"mode", [&](const Json& v) { mode = v.get<std::string>(); }},
          {"initial", [&](const Json& v) { initial = v.get<std::string>(); }},
      };
      for (auto& [key, value] : j.items()) {
        auto it = setters.find(key);
        if (it == setters.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
        if (opts.at(key)->count() > 0) continue;
        try {
          it->second(value);
        } catch (const Json::exception&) {
          throw std::invalid_argument("config: bad value for '" + key + "'");
        }
      }
    }
    cfg.model = parse_model_kind(model);
    cfg.format = parse_format(format);
    cfg.mode = parse_mode(mode);
    cfg.initial = parse_initial(initial);
    if (*bench_cmd && opts["epsilon"]->count() == 0) cfg.epsilon = 0.5;
    cfg.validate();

    if (*pipeline_cmd) return cmd_pipeline(cfg, out);
    if (*phase_cmd) return cmd_phase(cfg, phase_id, out);
    if (*analyze_cmd) return cmd_analyze(cfg, out);
    if (*arch_cmd) return cmd_arch(cfg, pattern, periods, out);
    if (*equiv_cmd) return cmd_equiv(cfg, out);
    if (*bench_cmd) return cmd_bench(cfg, min_power, max_power, out);
  } catch (const CheckFailed& e) {
    err << "check failed: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace spinref
