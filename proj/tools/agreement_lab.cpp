// agreement_lab: generate structures, run protocols, check substitutes,
// audit bounds, sweep corpora and run the built-in invariant suite.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "agreement/cli.hpp"

namespace {

using agreement::Command;
using agreement::RunConfig;

void add_output(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--out", cfg.outPath, "Write JSON output here instead of stdout");
  sub->add_flag("--no-timestamp", cfg.noTimestamp, "Omit the generatedAt field");
}

void add_generator(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--g", cfg.generator, "Generator: squared, kl or power:r");
}

void add_structure(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--structure", cfg.structurePath, "Structure JSON file")->required()->check(CLI::ExistingFile);
}

void add_corpus(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--kind", cfg.kind,
                  "xor, appendix-a, identical, random, substitutes, boolean-substitutes, perturbed or correlated");
  sub->add_option("--rows", cfg.rows, "Alice's signal count");
  sub->add_option("--cols", cfg.cols, "Bob's signal count");
  sub->add_option("--mix-weight", cfg.mixWeight, "Fixed blend weight (substitutes) or perturbation size");
}

void add_enumeration(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--tolerance", cfg.tolerance, "Violation tolerance");
  sub->add_option("--max-side", cfg.maxSide, "Largest side length for rectangle enumeration");
  sub->add_option("--exact-limit", cfg.exactLimit, "Largest cell count for exact delta");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-party agreement protocols on finite information structures"};
  app.require_subcommand(1);
  RunConfig cfg;

  CLI::App* gen = app.add_subcommand("gen", "Write a structure JSON file");
  add_corpus(gen, cfg);
  add_generator(gen, cfg);
  gen->add_option("--seed", cfg.seeds.front(), "PRNG seed");
  gen->add_option("--out", cfg.outPath, "Output path (stdout when omitted)");
  gen->callback([&] { cfg.command = Command::Gen; });

  CLI::App* run = app.add_subcommand("run", "Run a protocol and write its transcript");
  add_structure(run, cfg);
  add_generator(run, cfg);
  run->add_option("--protocol", cfg.protocol, "standard, disc-quad, disc-bregman or fast");
  run->add_option("--epsilon", cfg.epsilon, "Agreement parameter");
  run->add_option("--max-rounds", cfg.maxRounds, "Round cap for the standard protocol");
  run->add_option("--csv", cfg.csvPath, "Also write the per-round trace CSV");
  add_output(run, cfg);
  run->callback([&] { cfg.command = Command::Run; });

  CLI::App* check = app.add_subcommand("check", "Check the substitutes condition");
  add_structure(check, cfg);
  add_generator(check, cfg);
  check->add_option("--mode", cfg.mode, "weak, rectangle or delta");
  check->add_flag("--transposed", cfg.transposed, "Use the rearranged form of the inequality");
  add_enumeration(check, cfg);
  add_output(check, cfg);
  check->callback([&] { cfg.command = Command::Check; });

  CLI::App* audit = app.add_subcommand("audit", "Run a protocol and compare accuracy with the bound");
  add_structure(audit, cfg);
  add_generator(audit, cfg);
  audit->add_option("--protocol", cfg.protocol, "standard, disc-quad, disc-bregman or fast");
  audit->add_option("--epsilon", cfg.epsilon, "Agreement parameter");
  audit->add_option("--max-rounds", cfg.maxRounds, "Round cap for the standard protocol");
  audit->add_option("--c", cfg.c, "Approximate triangle constant for the Bregman bound");
  audit->add_option("--beta", cfg.beta, "Fixed beta (searched when omitted)");
  audit->add_flag("--boolean", cfg.boolean, "Evaluate boolean computation at --delta instead");
  audit->add_option("--delta", cfg.delta, "Target error for --boolean");
  audit->add_option("--csv", cfg.csvPath, "Also write the audit CSV row");
  add_enumeration(audit, cfg);
  add_output(audit, cfg);
  audit->callback([&] { cfg.command = Command::Audit; });

  CLI::App* sweep = app.add_subcommand("sweep", "Audit seeds x epsilons x protocols into one CSV");
  add_corpus(sweep, cfg);
  add_generator(sweep, cfg);
  sweep->add_option("--seeds", cfg.seeds, "Seeds")->expected(1, -1);
  sweep->add_option("--epsilons", cfg.epsilons, "Epsilon values")->expected(1, -1);
  sweep->add_option("--protocols", cfg.protocols, "Protocol kinds")->expected(1, -1);
  sweep->add_option("--max-rounds", cfg.maxRounds, "Round cap for the standard protocol");
  sweep->add_option("--c", cfg.c, "Approximate triangle constant for the Bregman bound");
  sweep->add_option("--csv,--out", cfg.csvPath, "CSV output path (stdout when omitted)");
  add_enumeration(sweep, cfg);
  sweep->callback([&] { cfg.command = Command::Sweep; });

  CLI::App* verify = app.add_subcommand("verify", "Run the built-in invariant suite");
  verify->add_option("--scale", cfg.verifyScale, "Multiply instance counts");
  add_output(verify, cfg);
  verify->callback([&] { cfg.command = Command::Verify; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return agreement::kExitInvalidInput;
  }
  return agreement::execute(cfg);
}
