#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coupled_tools/harness.hpp"

namespace ct = coupled::tools;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool quiet = false;
};

ct::RunConfig load(const Flags& f) {
  ct::RunConfig cfg = f.config.empty() ? ct::RunConfig{} : ct::load_run_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.output = *f.out;
  return cfg;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ct::UsageError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ct::UsageError("write failed for '" + path + "'");
}

int cmd_generate(const Flags& f) {
  const ct::RunConfig cfg = load(f);
  if (!cfg.generator_json) throw ct::UsageError("generate needs a generator spec under \"instance\"");
  const coupled::ProblemInstance inst = ct::build_instance(cfg);
  if (!cfg.output) throw ct::UsageError("generate needs an output path (--out or \"output\")");
  write_file(*cfg.output, coupled::instance_to_json(inst) + "\n");
  if (!f.quiet) std::cout << ct::spectral_summary(inst) << '\n';
  return kExitOk;
}

int cmd_solve(const Flags& f) {
  const ct::RunConfig cfg = load(f);
  const coupled::ProblemInstance inst = ct::build_instance(cfg);
  const ct::SolveReport rep = ct::run_solve(inst, cfg);
  if (cfg.output) {
    std::ofstream out(*cfg.output);
    if (!out) throw ct::UsageError("cannot write '" + *cfg.output + "'");
    coupled::write_trace_csv(rep.result.trace, out);
  }
  if (!f.quiet) {
    const auto& last = rep.result.trace.records.back();
    std::printf("iters=%zu grad_calls=%llu matmul_rounds=%llu comm_rounds=%llu "
                "feas_residual=%.6g",
                rep.result.iterations,
                static_cast<unsigned long long>(last.counters.grad_calls),
                static_cast<unsigned long long>(last.counters.matmul_rounds),
                static_cast<unsigned long long>(last.counters.comm_rounds), last.feas_residual);
    if (last.dist_to_opt) std::printf(" dist_to_opt=%.6g rel_err=%.6g", *last.dist_to_opt, rep.rel_err());
    std::printf(" stop=%s\n", coupled::to_string(rep.result.reason).c_str());
  }
  return kExitOk;
}

int cmd_verify(const Flags& f) {
  const ct::RunConfig cfg = load(f);
  const auto checks = ct::run_verify(cfg);
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.pass;
    if (!f.quiet) std::printf("%-4s  %-34s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
  }
  return all ? kExitOk : kExitFail;
}

int cmd_bench(const Flags& f) {
  const ct::RunConfig cfg = load(f);
  if (!cfg.sweep) throw ct::UsageError("bench needs a \"sweep\" section");
  const auto rows = ct::run_bench(*cfg.sweep, cfg.seed);
  const std::string csv = ct::bench_csv(rows);
  if (cfg.output) write_file(*cfg.output, csv);
  if (!f.quiet) std::cout << csv;
  for (const auto& r : rows)
    if (!r.reached) {
      std::cerr << "target error not reached at value " << r.value << '\n';
      return kExitFail;
    }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized optimization with affine coupled constraints"};
  app.require_subcommand(1);
  Flags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "run configuration (JSON)");
    sub->add_option("--seed", flags.seed, "override the configuration seed");
    sub->add_option("--out", flags.out, "output path");
    sub->add_flag("--quiet", flags.quiet, "suppress the summary on stdout");
  };
  CLI::App* gen = app.add_subcommand("generate", "write an instance file and print its constants");
  CLI::App* sol = app.add_subcommand("solve", "run the solver and write the trace CSV");
  CLI::App* ver = app.add_subcommand("verify", "run the invariant suite");
  CLI::App* ben = app.add_subcommand("bench", "sweep a condition number");
  for (auto* s : {gen, sol, ver, ben}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(flags);
    if (sol->parsed()) return cmd_solve(flags);
    if (ver->parsed()) return cmd_verify(flags);
    if (ben->parsed()) return cmd_bench(flags);
  } catch (const ct::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const coupled::NonFiniteIterate& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  } catch (const coupled::InvariantViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  } catch (const coupled::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
