#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "upsilon/report.hpp"

namespace {

std::uint64_t default_seed() {
  const char* env = std::getenv("UPSILON_SEED");
  if (!env || !*env) return 0;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    std::cerr << "warning: ignoring invalid UPSILON_SEED \"" << env << "\"\n";
    return 0;
  }
}

struct Flags {
  std::string input;
  std::string output;
  std::string timestamp;
  std::string epsilon = "1/100";
  std::string strategies = "random,coincident,generic";
  std::size_t rank = 0;
  bool quiet = false;
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  // `upsilon --input cfg.json --rank 2 ...` runs the search without naming the subcommand.
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() > 1 && args[1].rfind("-", 0) == 0 && args[1] != "--help" && args[1] != "-h" &&
      args[1] != "--version")
    args.insert(args.begin() + 1, "upsilon");

  upsilon::RunManifest manifest;
  upsilon::RunOptions& o = manifest.options;
  o.seed = default_seed();
  Flags f;

  CLI::App app{"Chern-number and stability computations for filtered configurations on surfaces"};
  app.set_version_flag("--version", std::string(upsilon::version));
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub, bool needs_input) {
    auto* in = sub->add_option("-i,--input", f.input, "Input document (JSON)");
    if (needs_input) in->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output", f.output, "Write the report here instead of stdout");
    sub->add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", o.seed, "Random seed (default: $UPSILON_SEED or 0)");
    sub->add_option("--timestamp", f.timestamp, "Timestamp recorded in the manifest");
    sub->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
    sub->add_flag("-q,--quiet", f.quiet, "Suppress progress messages");
  };
  auto add_stability = [&](CLI::App* sub) {
    sub->add_option("--stability-mode", o.stability_mode, "Stability check")
        ->check(CLI::IsMember({"auto", "exact2", "heuristic"}));
    sub->add_option("--samples", o.samples, "Random subspaces per dimension for the heuristic check");
  };

  auto* chern = app.add_subcommand("chern", "Chern numbers of a filtered configuration or system");
  add_common(chern, true);
  auto* stability = app.add_subcommand("stability", "Stability verdict of a filtered configuration");
  add_common(stability, true);
  add_stability(stability);
  auto* search = app.add_subcommand("upsilon", "Search for the best stable ratio c2/|F|^2");
  add_common(search, true);
  add_stability(search);
  search->add_option("-r,--rank", f.rank, "Rank of the local system")->check(CLI::PositiveNumber);
  search->add_option("-b,--budget", o.budget, "Number of candidate flag shapes")->check(CLI::PositiveNumber);
  search->add_option("--strategies", f.strategies, "Comma-separated: random, coincident, generic, user");
  auto* blowup = app.add_subcommand("blowup", "Blow up a plane arrangement at its listed points");
  add_common(blowup, true);
  blowup->add_option("--epsilon", f.epsilon, "Polarization H - epsilon * sum E_p");
  auto* demo = app.add_subcommand("demo", "Worked examples: concurrent lines, two lines, three generic lines");
  add_common(demo, false);
  demo->add_option("--epsilon", f.epsilon, "Polarization used for the blow-up step");

  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (chern->parsed()) manifest.command = upsilon::Command::Chern;
  if (stability->parsed()) manifest.command = upsilon::Command::Stability;
  if (search->parsed()) manifest.command = upsilon::Command::Upsilon;
  if (blowup->parsed()) manifest.command = upsilon::Command::Blowup;
  if (demo->parsed()) manifest.command = upsilon::Command::Demo;

  try {
    o.epsilon = upsilon::Rat::parse(f.epsilon);
  } catch (const upsilon::Error& e) {
    std::cerr << "error: --epsilon: " << e.message() << "\n";
    return 2;
  }
  if (f.rank > 0) o.rank = f.rank;
  o.strategies = split(f.strategies);
  manifest.input_path = f.input;
  manifest.timestamp = f.timestamp.empty() ? upsilon::utc_timestamp() : f.timestamp;

  if (!f.quiet) std::cerr << "upsilon " << upsilon::to_string(manifest.command) << ": running\n";
  upsilon::RunResult result = upsilon::run(manifest);
  if (!result.error.empty()) std::cerr << "error: " << result.error << "\n";
  if (!result.output.empty()) {
    if (f.output.empty()) {
      std::cout << result.output;
    } else {
      std::ofstream out(f.output, std::ios::binary);
      out << result.output;
      if (!out) {
        std::cerr << "error: cannot write " << f.output << "\n";
        return 1;
      }
    }
  }
  if (!f.quiet && result.exit_code == 0) std::cerr << "upsilon " << upsilon::to_string(manifest.command) << ": done\n";
  return result.exit_code;
}
