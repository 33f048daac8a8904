// odpo: command-line front end.
//
// Exit codes: 0 success, 1 usage or input error, 2 design did not converge
// (or the difference arms are degenerate), 3 some replica rows failed.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "odpo/design.hpp"
#include "odpo/evaluation.hpp"
#include "odpo/experiment.hpp"
#include "odpo/instance.hpp"
#include "odpo/io.hpp"
#include "odpo/lower_bounds.hpp"
#include "odpo/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConvergence = 2;
constexpr int kExitPartial = 3;

// Writes through a temporary file so a failed run never leaves a partial
// output behind.
void write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw odpo::Error(fmt::format("cannot write '{}'", path));
    out << content;
    if (!out) throw odpo::Error(fmt::format("cannot write '{}'", path));
  }
  std::filesystem::rename(tmp, path);
}

bool flag_given(int argc, char** argv, const std::string& name) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == name || a.rfind(name + "=", 0) == 0) return true;
  }
  return false;
}

// ODPO_SEED beats the config file but not an explicit --seed.
void apply_seed_env(std::uint64_t& seed, int argc, char** argv) {
  if (flag_given(argc, argv, "--seed")) return;
  if (const char* env = std::getenv("ODPO_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing");
      seed = v;
    } catch (const std::exception&) {
      throw odpo::Error(fmt::format("ODPO_SEED='{}' is not an unsigned integer", env));
    }
  }
}

// CLI11 only reads config files for the top-level app, so the `run`
// subcommand's file is parsed with CLI11's INI reader and its keys are
// spliced in as `--key=value` arguments right after the subcommand name.
// Keys already given as flags are skipped, which makes flags win.
std::vector<std::string> with_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  std::size_t run_pos = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (run_pos == args.size() && args[i] == "run") run_pos = i;
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || run_pos == args.size()) {
    std::reverse(args.begin(), args.end());
    return args;  // CLI11 expects the vector form reversed
  }
  std::ifstream in(path);
  if (!in) throw odpo::Error(fmt::format("cannot open config file '{}'", path));
  std::vector<std::string> injected;
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == "default")) {
      throw odpo::Error(fmt::format("config key '{}' is nested; only flat keys are allowed",
                                    item.fullname()));
    }
    const std::string flag = "--" + item.name;
    if (flag_given(argc, argv, flag)) continue;
    std::string value;
    for (const auto& v : item.inputs) value += (value.empty() ? "" : ",") + v;
    injected.push_back(value.empty() ? flag : flag + "=" + value);
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(run_pos) + 1, injected.begin(),
              injected.end());
  std::reverse(args.begin(), args.end());
  return args;
}

std::optional<odpo::StopRule> parse_stop_rule(const std::string& s) {
  if (s == "one-plus-eps") return odpo::StopRule::kOnePlusEpsilon;
  if (s == "sqrt-one-plus-eps") return odpo::StopRule::kSqrtOnePlusEpsilon;
  return std::nullopt;
}

std::optional<odpo::DesignInit> parse_init(const std::string& s) {
  if (s == "greedy-volume") return odpo::DesignInit::kGreedyVolume;
  if (s == "uniform") return odpo::DesignInit::kUniform;
  return std::nullopt;
}

struct GenArgs {
  std::string generator = "random";
  int n = 20;
  int k = 3;
  int d = 4;
  std::uint64_t seed = 0;
  std::string out;
};

struct DesignArgs {
  std::string instance;
  std::string out;
  double lambda = 1e-6;
  double epsilon = 0.5;
  int max_iters = 5000;
  std::string stop_rule = "one-plus-eps";
  std::string init = "greedy-volume";
  int horizon = 0;
  std::string allocation_out;
};

struct RunArgs {
  std::string generator = "random";
  std::string instance;
  int n = 20;
  int k = 3;
  std::vector<int> dims = {4};
  std::vector<int> horizons;
  std::vector<int> multipliers = {1, 4, 16};
  std::vector<std::string> algorithms = {"odpo"};
  int replicas = 10;
  std::uint64_t seed = 0;
  double lambda_design = 1e-6;
  double lambda_est = 0.0;  // 0 selects 1/d
  double epsilon = 0.5;
  double delta = 0.05;
  int fw_max_iters = 5000;
  bool fixed_instance = false;
  int jobs = 1;
  std::string out_dir;
};

struct LowerBoundArgs {
  std::string kind;
  int horizon = 5;
  int d = 8;
  int replicas = 2000;
  std::string algorithm = "odpo";
  std::uint64_t seed = 0;
  double lambda_design = 1e-6;
  double lambda_est = 0.0;
  double epsilon = 0.5;
  double delta = 0.05;
  std::string out;
};

int cmd_gen_instance(const GenArgs& a) {
  const auto gen = odpo::parse_generator(a.generator);
  std::optional<odpo::Instance> inst;
  if (gen == odpo::InstanceGenerator::kRandom) {
    inst = odpo::make_random_instance(a.n, a.k, a.d, a.seed);
  } else if (gen == odpo::InstanceGenerator::kAnisotropic) {
    inst = odpo::make_anisotropic_instance(a.n, a.d, a.seed);
  } else {
    throw odpo::Error("gen-instance supports the random and anisotropic generators");
  }
  std::ostringstream ss;
  odpo::write_instance(*inst, ss);
  write_file(a.out, ss.str());
  if (!inst->spans()) {
    std::cerr << "warning: SpanDeficient: difference arms do not span R^d\n";
  }
  std::cout << fmt::format("wrote {} (N={} K={} d={} |B|={})\n", a.out, inst->num_contexts(),
                           inst->max_arms(), inst->dimension(), inst->diff_arms().size());
  return kExitOk;
}

int cmd_design(const DesignArgs& a) {
  const odpo::Instance inst = odpo::read_instance_file(a.instance);
  odpo::FrankWolfeOptions opts;
  opts.lambda = a.lambda;
  opts.epsilon = a.epsilon;
  opts.max_iters = a.max_iters;
  opts.stop_rule = *parse_stop_rule(a.stop_rule);
  opts.init = *parse_init(a.init);
  if (inst.diff_arms().empty()) {
    std::cerr << "warning: SpanDeficient: every action set has identical arms; no "
                 "difference arms to design over\n";
    return kExitConvergence;
  }
  const odpo::FrankWolfeResult fw = odpo::frank_wolfe_design(inst.diff_arms(), opts);
  const odpo::KwCertificate cert = odpo::kw_certificate(fw.design, inst.diff_arms(), opts.lambda);
  std::ostringstream ss;
  odpo::write_design(fw, cert, opts, ss);
  write_file(a.out, ss.str());
  if (a.horizon > 0 && !a.allocation_out.empty()) {
    std::ostringstream as;
    odpo::write_allocation(odpo::allocate(fw.design, a.horizon), as);
    write_file(a.allocation_out, as.str());
  }
  std::cout << fmt::format("iterations {} final_g {:.12g} threshold {:.12g} support {}\n",
                           fw.iterations, fw.final_g, fw.threshold, fw.design.support.size());
  int code = kExitOk;
  if (fw.span_deficient) {
    std::cerr << "warning: SpanDeficient: difference arms do not span R^d; the ridge "
                 "dominates the missing directions\n";
    code = kExitConvergence;
  }
  if (!fw.converged()) {
    std::cerr << fmt::format("warning: MaxIters: stopped after {} iterations at g = {:.12g} "
                             "> {:.12g}; best iterate written\n",
                             fw.iterations, fw.final_g, fw.threshold);
    code = kExitConvergence;
  }
  return code;
}

int cmd_run(const RunArgs& a) {
  odpo::ExperimentConfig cfg;
  cfg.generator = odpo::parse_generator(a.generator);
  if (!a.instance.empty()) {
    cfg.generator = odpo::InstanceGenerator::kFile;
    cfg.instance = odpo::read_instance_file(a.instance);
  } else if (cfg.generator == odpo::InstanceGenerator::kFile) {
    throw odpo::Error("--generator file needs --instance");
  }
  cfg.num_contexts = a.n;
  cfg.arms_per_context = a.k;
  cfg.fixed_instance = a.fixed_instance;
  cfg.algorithms.clear();
  for (const auto& name : a.algorithms) cfg.algorithms.push_back(odpo::parse_algorithm(name));
  std::vector<int> dims = a.dims;
  if (cfg.instance) dims = {cfg.instance->dimension()};
  for (int d : dims) {
    if (!a.horizons.empty()) {
      for (int t : a.horizons) cfg.grid.push_back({d, t});
    } else {
      for (int m : a.multipliers) cfg.grid.push_back({d, m * d * d});
    }
  }
  cfg.replicas = a.replicas;
  cfg.master_seed = a.seed;
  cfg.odpo.lambda_design = a.lambda_design;
  if (a.lambda_est > 0.0) cfg.odpo.lambda_est = a.lambda_est;
  cfg.odpo.epsilon = a.epsilon;
  cfg.odpo.delta = a.delta;
  cfg.odpo.fw_max_iters = a.fw_max_iters;
  cfg.jobs = a.jobs;
  cfg.keep_records = true;

  const odpo::RegretReport report = odpo::run_experiment(cfg);

  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);
  std::ostringstream csv, summary, records;
  odpo::write_regret_csv(report, csv);
  odpo::write_aggregate_csv(report, summary);
  for (const auto& row : report.rows) {
    if (!row.record.empty()) records << row.record << '\n';
  }
  write_file((dir / "regret.csv").string(), csv.str());
  write_file((dir / "summary.csv").string(), summary.str());
  write_file((dir / "runs.jsonl").string(), records.str());
  odpo::write_aggregate_table(report, std::cout);
  if (report.has_errors()) {
    for (const auto& row : report.rows) {
      if (row.is_error()) {
        std::cerr << fmt::format("replica {} {} d={} T={}: {}\n", row.replica,
                                 odpo::to_string(row.algorithm), row.dimension, row.horizon,
                                 row.status);
      }
    }
    return kExitPartial;
  }
  return kExitOk;
}

odpo::OdpoConfig lower_bound_config(const LowerBoundArgs& a) {
  odpo::OdpoConfig cfg;
  cfg.lambda_design = a.lambda_design;
  if (a.lambda_est > 0.0) cfg.lambda_est = a.lambda_est;
  cfg.epsilon = a.epsilon;
  cfg.delta = a.delta;
  return cfg;
}

int cmd_lower_bound(const LowerBoundArgs& a) {
  const odpo::Algorithm alg = odpo::parse_algorithm(a.algorithm);
  const odpo::OdpoConfig cfg = lower_bound_config(a);
  nlohmann::ordered_json j;
  j["kind"] = a.kind;
  if (a.kind == "online") {
    const auto r = odpo::verify_online_lower_bound(a.horizon, alg, a.replicas, a.seed, cfg);
    j["T"] = r.horizon;
    j["replicas"] = r.replicas;
    j["algorithm"] = r.algorithm;
    j["seed"] = a.seed;
    j["kl_constant"] = r.kl_constant;
    j["floor"] = r.floor;
    j["p_err_theta"] = r.p_err_theta;
    j["p_err_theta_prime"] = r.p_err_theta_prime;
    j["p_err_sum"] = r.p_err_sum;
    j["std_error"] = r.std_error;
    j["mean_regret_theta"] = r.mean_regret_theta;
    j["mean_regret_theta_prime"] = r.mean_regret_theta_prime;
    auto floors = nlohmann::ordered_json::array();
    for (const auto& f : r.floors_by_horizon) {
      floors.push_back({{"T", f.horizon}, {"kl_constant", f.kl_constant}, {"floor", f.floor}});
    }
    j["floors_by_horizon"] = floors;
    j["floor_holds"] = r.floor_holds;
    j["floor_horizon_independent"] = r.floor_horizon_independent;
    std::cout << fmt::format("p_err(theta) + p_err(theta') = {:.6g} (SE {:.3g}), floor "
                             "exp(-c)/2 = {:.6g} with c = {:.6g}: {}\n",
                             r.p_err_sum, r.std_error, r.floor, r.kl_constant,
                             r.floor_holds ? "holds" : "VIOLATED");
  } else {
    const auto r =
        odpo::verify_hypercube_lower_bound(a.d, a.horizon, alg, a.replicas, a.seed, cfg);
    j["d"] = r.dimension;
    j["T"] = r.horizon;
    j["replicas"] = r.replicas;
    j["algorithm"] = r.algorithm;
    j["seed"] = a.seed;
    j["effective_T"] = r.effective_t;
    j["mean_regret"] = r.mean_regret;
    j["std_error"] = r.std_error;
    j["floor"] = r.floor;
    j["corollary_expected"] = r.corollary_expected;
    j["corollary_high_probability"] = r.corollary_high_probability;
    j["pair_floor"] = r.pair_floor;
    j["kl_limit"] = r.kl_limit;
    auto coords = nlohmann::ordered_json::array();
    for (const auto& c : r.coordinates) {
      coords.push_back({{"coordinate", c.coordinate},
                        {"error_rate", c.error_rate},
                        {"pair_sum", c.pair_sum},
                        {"pair_std_error", c.pair_std_error},
                        {"max_kl", c.max_kl}});
    }
    j["coordinates"] = coords;
    j["desk_scale"] = r.desk_scale;
    j["regret_above_floor"] = r.regret_above_floor;
    j["regret_below_corollary"] = r.regret_below_corollary;
    j["pair_floor_holds"] = r.pair_floor_holds;
    j["kl_within_limit"] = r.kl_within_limit;
    std::cout << fmt::format("mean regret {:.6g} (SE {:.3g}), floor {:.6g}, expected-regret upper bound "
                             "{:.6g}{}\n",
                             r.mean_regret, r.std_error, r.floor, r.corollary_expected,
                             r.desk_scale ? " [desk scale: d < 16]" : "");
  }
  write_file(a.out, j.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline optimal-design preference-pair selection: designs, simulated "
               "runs and lower-bound checks"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-instance", "Generate a synthetic instance file");
  gen_cmd->add_option("--generator", gen.generator, "random or anisotropic")
      ->capture_default_str()
      ->check(CLI::IsMember({"random", "anisotropic"}));
  gen_cmd->add_option("--N", gen.n, "Number of contexts")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--K", gen.k, "Arms per context (random generator)")
      ->capture_default_str()
      ->check(CLI::Range(2, 100000));
  gen_cmd->add_option("--d", gen.d, "Dimension")->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output instance file")->required();

  DesignArgs des;
  auto* des_cmd = app.add_subcommand("design", "Solve the optimal design for an instance");
  des_cmd->add_option("--instance", des.instance, "Instance file")->required();
  des_cmd->add_option("--out", des.out, "Output design file")->required();
  des_cmd->add_option("--lambda", des.lambda, "Design ridge")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  des_cmd->add_option("--epsilon", des.epsilon, "Approximation slack")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  des_cmd->add_option("--max-iters", des.max_iters, "Frank-Wolfe iteration cap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  des_cmd->add_option("--stop-rule", des.stop_rule, "one-plus-eps or sqrt-one-plus-eps")
      ->capture_default_str()
      ->check(CLI::IsMember({"one-plus-eps", "sqrt-one-plus-eps"}));
  des_cmd->add_option("--init", des.init, "greedy-volume or uniform")
      ->capture_default_str()
      ->check(CLI::IsMember({"greedy-volume", "uniform"}));
  des_cmd->add_option("--T", des.horizon, "Horizon for the optional allocation file")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  des_cmd->add_option("--allocation-out", des.allocation_out, "Allocation file (needs --T)");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Replicated regret experiment");
  std::string config_path;
  run_cmd->add_option("--config", config_path, "Flat key = value file; flags override it");
  run_cmd->add_option("--generator", run.generator, "random, anisotropic or file")
      ->capture_default_str()
      ->check(CLI::IsMember({"random", "anisotropic", "file"}));
  run_cmd->add_option("--instance", run.instance, "Instance file (implies --generator file)");
  run_cmd->add_option("--N", run.n, "Contexts per generated instance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--K", run.k, "Arms per context")
      ->capture_default_str()
      ->check(CLI::Range(2, 100000));
  run_cmd->add_option("--d", run.dims, "Dimensions, comma separated")
      ->capture_default_str()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--T", run.horizons, "Horizons, comma separated (overrides --T-mult)")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--T-mult", run.multipliers, "Horizons as multiples of d^2")
      ->capture_default_str()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--algorithms", run.algorithms, "odpo, uniform, greedy; comma separated")
      ->capture_default_str()
      ->delimiter(',')
      ->check(CLI::IsMember({"odpo", "uniform", "greedy"}));
  run_cmd->add_option("--replicas", run.replicas, "Replicas per grid point")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run.seed, "Master seed (ODPO_SEED overrides the config file)")
      ->capture_default_str();
  run_cmd->add_option("--lambda-design", run.lambda_design, "Design ridge")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--lambda-est", run.lambda_est, "Estimation ridge; 0 means 1/d")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--epsilon", run.epsilon, "Design approximation slack")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--delta", run.delta, "Confidence level")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--fw-max-iters", run.fw_max_iters, "Frank-Wolfe iteration cap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--fixed-instance", run.fixed_instance,
                    "Share one generated instance across replicas");
  run_cmd->add_option("--jobs", run.jobs, "Parallel workers")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--out-dir", run.out_dir,
                      "Directory for regret.csv, summary.csv and runs.jsonl")
      ->required();

  LowerBoundArgs lb;
  auto* lb_cmd = app.add_subcommand("lower-bound", "Monte Carlo check of a lower-bound construction");
  lb_cmd->add_option("kind", lb.kind, "online or hypercube")->required();
  lb_cmd->add_option("--T", lb.horizon, "Horizon")->capture_default_str()->check(CLI::PositiveNumber);
  lb_cmd->add_option("--d", lb.d, "Dimension (hypercube)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  lb_cmd->add_option("--replicas", lb.replicas, "Replicas (per environment for online)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  lb_cmd->add_option("--algorithm", lb.algorithm, "odpo, uniform or greedy")
      ->capture_default_str()
      ->check(CLI::IsMember({"odpo", "uniform", "greedy"}));
  lb_cmd->add_option("--seed", lb.seed, "Seed")->capture_default_str();
  lb_cmd->add_option("--lambda-design", lb.lambda_design, "Design ridge")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  lb_cmd->add_option("--lambda-est", lb.lambda_est, "Estimation ridge; 0 means 1/d")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  lb_cmd->add_option("--epsilon", lb.epsilon, "Design approximation slack")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  lb_cmd->add_option("--delta", lb.delta, "Confidence level")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  lb_cmd->add_option("--out", lb.out, "Report file (JSON)")->required();

  std::vector<std::string> args;
  try {
    args = with_config_args(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen_cmd) {
      apply_seed_env(gen.seed, argc, argv);
      return cmd_gen_instance(gen);
    }
    if (*des_cmd) return cmd_design(des);
    if (*run_cmd) {
      apply_seed_env(run.seed, argc, argv);
      return cmd_run(run);
    }
    if (*lb_cmd) {
      if (lb.kind != "online" && lb.kind != "hypercube") {
        std::cerr << fmt::format("error: unknown lower-bound kind '{}'\n\n", lb.kind)
                  << lb_cmd->help();
        return kExitUsage;
      }
      apply_seed_env(lb.seed, argc, argv);
      return cmd_lower_bound(lb);
    }
  } catch (const odpo::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
