// rectune: operator CLI for the tuning loop.
//
// Exit codes: 0 success, 1 validation error, 2 runtime/platform error,
// 130 interrupted.

#include <unistd.h>

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <memory>
#include <string>

#include "rectune/rectune.hpp"

namespace {

using namespace rectune;

std::atomic<bool> g_interrupt{false};

extern "C" void on_sigint(int) { g_interrupt.store(true); }

struct Flags {
  std::string workdir;
  std::string skill;
  std::string scenario;
  int rounds = 1;
  std::size_t batch = 4;
  std::string proposer = "heuristic";
  bool auto_approve = false;
  std::uint64_t seed = 0;
  std::string format = "md";
  bool force = false;
  std::optional<std::int64_t> test_clock;
  std::string experiment;
  int seeds = 20;
  double fault_rate = 0.3;
};

bool interactive() { return ::isatty(STDIN_FILENO) && ::isatty(STDERR_FILENO); }

// y/n per experiment on the terminal; anything but y/yes declines.
bool ask(const ab::ExperimentSpec& spec) {
  std::cerr << "\nExperiment " << spec.experiment_id << " (" << spec.arms.size() << " arms vs control "
            << spec.control.canonical() << ")\n";
  for (const auto& a : spec.arms) std::cerr << "  " << a.arm_id << "  " << a.config.canonical() << "\n";
  std::cerr << "Launch? [y/N] " << std::flush;
  std::string line;
  if (!std::getline(std::cin, line)) return false;
  return line == "y" || line == "Y" || line == "yes";
}

// Fail closed: without --auto-approve somebody must be at a terminal.
void require_gate(const Flags& f) {
  if (!f.auto_approve && !interactive())
    throw ValidationError("experiments need review: no terminal attached and --auto-approve not given", "auto_approve");
}

struct Llm {
  std::unique_ptr<llm::HttpChatClient> client;
};

loop::LoopOptions loop_options(const Flags& f, Llm& llm) {
  loop::LoopOptions o;
  o.batch = f.batch;
  o.seed = f.seed;
  o.auto_approve = f.auto_approve;
  o.interrupt = &g_interrupt;
  o.log = [](const std::string& m) { std::cerr << m << "\n"; };
  if (!f.auto_approve) o.reviewer = ask;
  if (f.proposer == "llm") {
    const auto cfg = llm::EndpointConfig::from_env();
    llm.client = std::make_unique<llm::HttpChatClient>(cfg);
    o.proposer = agents::Proposer::llm;
    o.llm.backend = llm.client.get();
    o.llm.model = cfg.model;
  }
  return o;
}

void print_task(const mem::TaskRecord& t) {
  std::cout << t.id << "  " << mem::status_name(t.status);
  if (!t.check_info.verdict.empty()) {
    std::cout << "  " << t.check_info.verdict;
    if (!t.check_info.reason.empty()) std::cout << " (" << t.check_info.reason << ")";
  }
  if (t.evaluation) std::cout << "  utility " << json(t.evaluation->raw).dump() << (t.evaluation->feasible ? "" : " infeasible");
  std::cout << "  " << t.config << "\n";
}

int cmd_init(const Flags& f) {
  const auto skill = skills::load_skill(f.skill);
  const auto scenario = sim::load_scenario(f.scenario);
  loop::init_workdir(f.workdir, skill, scenario, {f.force, f.test_clock});
  std::cout << "initialized " << f.workdir << " for skill " << skill.name << " v" << skill.version << " on scenario "
            << scenario.name << "\n";
  return 0;
}

int cmd_loop(const Flags& f) {
  require_gate(f);
  Llm llm;
  loop::Session s(f.workdir, loop_options(f, llm));
  for (int i = 0; i < f.rounds; ++i) {
    const auto r = s.run_round();
    std::cout << "round " << r.round << ": " << r.approved << " approved, " << r.arm_count << " arms, " << r.failed
              << " failed, best utility " << (r.best_utility ? json(*r.best_utility).dump() : "n/a");
    if (r.best_task_id) std::cout << " (" << *r.best_task_id << ")";
    std::cout << ", skill v" << r.skill_version << "\n";
  }
  if (const auto best = s.best()) std::cout << "best config " << best->id << ": " << best->config << "\n";
  return 0;
}

int cmd_report(const Flags& f) {
  const auto data = loop::collect_report(f.workdir);
  for (const auto& p : loop::write_report(f.workdir, f.format)) std::cout << "wrote " << p.string() << "\n";
  if (data.empty()) std::cout << "No completed rounds yet.\n";
  return 0;
}

int cmd_propose(const Flags& f) {
  Llm llm;
  loop::Session s(f.workdir, loop_options(f, llm));
  for (const auto& t : s.propose_step()) print_task(t);
  return 0;
}

int cmd_critique(const Flags& f) {
  Llm llm;
  loop::Session s(f.workdir, loop_options(f, llm));
  for (const auto& t : s.critique_step()) print_task(t);
  return 0;
}

int cmd_run(const Flags& f) {
  require_gate(f);
  Llm llm;
  loop::Session s(f.workdir, loop_options(f, llm));
  if (const auto id = s.run_step())
    std::cout << "experiment " << *id << " done; run `collect` to record results\n";
  else
    std::cout << "no experiment launched\n";
  return 0;
}

int cmd_collect(const Flags& f) {
  Llm llm;
  loop::Session s(f.workdir, loop_options(f, llm));
  const auto out = s.collect_step(f.experiment.empty() ? std::nullopt : std::optional<std::string>(f.experiment));
  if (out.empty()) std::cout << "nothing to collect\n";
  for (const auto& t : out) print_task(t);
  return 0;
}

int cmd_insight(const Flags& f) {
  Llm llm;
  loop::Session s(f.workdir, loop_options(f, llm));
  std::cout << agents::to_json(s.insight_step()).dump(2) << "\n";
  return 0;
}

int cmd_evolve(const Flags& f) {
  Llm llm;
  loop::Session s(f.workdir, loop_options(f, llm));
  const auto r = s.evolve_step();
  std::cout << "published " << r.skill.name << " v" << r.skill.version << ": " << r.knowledge_added
            << " knowledge added, " << r.knowledge_retired << " retired";
  if (!r.tightened.empty()) {
    std::cout << ", bounds tightened:";
    for (const auto& p : r.tightened) std::cout << " " << p;
  }
  std::cout << "\n";
  return 0;
}

int cmd_ablate(const Flags& f) {
  if (f.seeds < 1) throw ValidationError("need at least one seed", "seeds");
  loop::StrategySetup setup;
  setup.skill = skills::load_skill(f.skill);
  setup.scenario = sim::load_scenario(f.scenario);
  setup.pools = std::make_shared<ab::PoolCache>(setup.scenario);
  setup.scratch = f.workdir;
  setup.rounds = f.rounds;
  setup.batch = f.batch;
  setup.fault_rate = f.fault_rate;
  int wins = 0;
  std::printf("%-6s %14s %10s %14s %10s\n", "seed", "critic best", "eff", "actor best", "eff");
  for (int i = 1; i <= f.seeds; ++i) {
    if (g_interrupt.load()) throw loop::Interrupted();
    const auto seed = f.seed + static_cast<std::uint64_t>(i);
    const auto on = loop::run_strategy(setup, true, seed);
    const auto off = loop::run_strategy(setup, false, seed);
    const double a = on.best_utility.value_or(-1e300), b = off.best_utility.value_or(-1e300);
    wins += a >= b;
    std::printf("%-6llu %14.6g %10.4f %14.6g %10.4f\n", static_cast<unsigned long long>(seed), a, on.effective_budget(),
                b, off.effective_budget());
  }
  std::printf("critic-enabled >= actor-only in %d of %d seeds\n", wins, f.seeds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rectune: agentic configuration tuning for a simulated recommender"};
  app.require_subcommand(1);
  Flags f;

  auto workdir = [&](CLI::App* c) { c->add_option("--workdir", f.workdir, "Run directory")->required(); };
  auto loopish = [&](CLI::App* c) {
    c->add_option("--batch", f.batch, "Arms per round (B)")->check(CLI::PositiveNumber);
    c->add_option("--seed", f.seed, "Proposal seed");
    c->add_option("--proposer", f.proposer, "Actor backend")->check(CLI::IsMember({"heuristic", "llm"}));
    c->add_flag("--auto-approve", f.auto_approve, "Skip the human review gate");
  };

  auto* init = app.add_subcommand("init", "Create a workdir for a skill and scenario");
  workdir(init);
  init->add_option("--skill", f.skill, "Skill file")->required()->check(CLI::ExistingFile);
  init->add_option("--scenario", f.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  init->add_flag("--force", f.force, "Reinitialize a non-empty workdir");
  init->add_option("--test-clock", f.test_clock, "Deterministic clock starting at this Unix epoch");

  auto* lp = app.add_subcommand("loop", "Run R rounds of propose, critique, experiment, learn, evolve");
  workdir(lp);
  loopish(lp);
  lp->add_option("--rounds", f.rounds, "Rounds (R)")->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "Write round and elite tables");
  workdir(report);
  report->add_option("--format", f.format, "md or csv")->check(CLI::IsMember({"md", "csv"}));

  auto* propose = app.add_subcommand("propose", "Draft B proposals for the next round");
  workdir(propose);
  loopish(propose);
  auto* critique = app.add_subcommand("critique", "Review pending proposals, keeping at most B");
  workdir(critique);
  critique->add_option("--batch", f.batch, "Proposals to keep")->check(CLI::PositiveNumber);
  auto* run = app.add_subcommand("run", "Launch an experiment over the approved proposals");
  workdir(run);
  run->add_flag("--auto-approve", f.auto_approve, "Skip the human review gate");
  auto* collect = app.add_subcommand("collect", "Record results of finished experiments");
  workdir(collect);
  collect->add_option("--experiment", f.experiment, "Experiment id (default: all with running arms)");
  auto* insight = app.add_subcommand("insight", "Learn parameter sensitivities and patterns");
  workdir(insight);
  auto* evolve = app.add_subcommand("evolve", "Publish the next skill version from the stored insight");
  workdir(evolve);

  auto* ablate = app.add_subcommand("ablate", "Critic-enabled vs actor-only loops under fault injection");
  ablate->add_option("--workdir", f.workdir, "Scratch directory for the runs")->required();
  ablate->add_option("--skill", f.skill, "Skill file")->required()->check(CLI::ExistingFile);
  ablate->add_option("--scenario", f.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  ablate->add_option("--rounds", f.rounds, "Rounds per run")->check(CLI::PositiveNumber);
  ablate->add_option("--batch", f.batch, "Arms per round")->check(CLI::PositiveNumber);
  ablate->add_option("--seed", f.seed, "Seed offset; runs use seed+1 .. seed+N");
  ablate->add_option("--seeds", f.seeds, "Number of seeds")->check(CLI::PositiveNumber);
  ablate->add_option("--fault-rate", f.fault_rate, "Fraction of proposals replaced by invalid ones")
      ->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (ablate->parsed() && !ablate->count("--rounds")) f.rounds = 20;

  std::signal(SIGINT, on_sigint);
  try {
    if (init->parsed()) return cmd_init(f);
    if (lp->parsed()) return cmd_loop(f);
    if (report->parsed()) return cmd_report(f);
    if (propose->parsed()) return cmd_propose(f);
    if (critique->parsed()) return cmd_critique(f);
    if (run->parsed()) return cmd_run(f);
    if (collect->parsed()) return cmd_collect(f);
    if (insight->parsed()) return cmd_insight(f);
    if (evolve->parsed()) return cmd_evolve(f);
    if (ablate->parsed()) return cmd_ablate(f);
  } catch (const loop::Interrupted&) {
    std::cerr << "interrupted; the next invocation resolves unfinished records\n";
    return 130;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
