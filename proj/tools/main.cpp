#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <iostream>
#include <thread>

#include "commands.hpp"
#include "peapod/errors.hpp"
#include "peapod/version.hpp"
#include "scenario.hpp"

using namespace peapod::cli;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  std::vector<std::string> formats;
  std::string check;
  std::string sweep;
  unsigned threads = 0;
  bool dry_run = false;
  bool json_errors = false;
};

struct RunRecord {
  int exit_code = kExitOk;
  json output;
};

void report_error(const ErrorInfo& info, bool as_json) {
  if (as_json) {
    std::cerr << error_json(info).dump() << '\n';
  } else {
    std::cerr << "peapod: " << info.kind << ": " << info.message << '\n';
  }
}

RunRecord execute(Command command, json doc, bool dry_run) {
  const auto scenario = make_scenario(command, std::move(doc));
  if (dry_run) return {kExitOk, derived_parameters(scenario)};
  auto outcome = run_scenario(scenario);
  const auto files = write_outcome(scenario, outcome);
  outcome.report["files"] = files;
  return {outcome.exit_code, outcome.report};
}

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '[' || c == '{') ++depth;
    if (c == ']' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int run_sweep(Command command, const json& base, const Options& opt) {
  const auto eq = opt.sweep.find('=');
  if (eq == std::string::npos) throw peapod::InvalidInput("--sweep must look like key.path=v1,v2,...");
  const auto key = opt.sweep.substr(0, eq);
  const auto values = split_values(opt.sweep.substr(eq + 1));
  const std::filesystem::path root = base.contains("output") && base["output"].contains("dir")
                                         ? base["output"]["dir"].get<std::string>()
                                         : std::string("out");

  std::vector<RunRecord> records(values.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < values.size(); k = next++) {
      try {
        json doc = base;
        apply_override(doc, key + "=" + values[k]);
        doc["output"]["dir"] = (root / ("sweep_" + std::to_string(k))).string();
        records[k] = execute(command, std::move(doc), opt.dry_run);
      } catch (...) {
        const auto info = classify(std::current_exception());
        records[k] = {info.exit_code, error_json(info)};
      }
    }
  };
  unsigned n = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(values.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  json out = json::array();
  int code = kExitOk;
  for (std::size_t k = 0; k < values.size(); ++k) {
    out.push_back({{"key", key}, {"value", values[k]}, {"exit_code", records[k].exit_code},
                   {"result", records[k].output}});
    if (code == kExitOk) code = records[k].exit_code;
  }
  std::cout << out.dump(2) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peapod quantum-register simulator and planner"};
  app.set_version_flag("--version", std::string(peapod::kVersion));
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config, "scenario JSON file")->check(CLI::ExistingFile);
  app.add_option("--out", opt.out, "output directory");
  app.add_option("--seed", opt.seed, "random seed");
  app.add_option("--set", opt.sets, "override a config field: dotted.key=value");
  app.add_option("--format", opt.formats, "artifact formats to write")
      ->check(CLI::IsMember({"csv", "json", "svg"}));
  app.add_flag("--dry-run", opt.dry_run, "validate and print derived parameters");
  app.add_option("--sweep", opt.sweep, "run one scenario per value: dotted.key=v1,v2,...");
  app.add_option("--threads", opt.threads, "worker threads for --sweep");
  app.add_flag("--json-errors", opt.json_errors, "print errors as JSON on stderr");

  std::vector<std::pair<Command, CLI::App*>> subs;
  const char* help[] = {"energies and transition catalogs", "gate-identity verification",
                        "pulse-level sequence simulation", "mobile-electron readout counts",
                        "bus-qubit state transfer",       "frequency-addressing plan",
                        "thermal populations"};
  for (std::size_t k = 0; k < std::size(kAllCommands); ++k) {
    auto* sub = app.add_subcommand(std::string(to_string(kAllCommands[k])), help[k]);
    sub->fallthrough();
    subs.emplace_back(kAllCommands[k], sub);
  }
  subs[1].second->add_option("--check", opt.check, "which identities to verify")
      ->check(CLI::IsMember({"eq3", "protocol", "pulse", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report_error({kExitConfig, "config_error", e.what()}, opt.json_errors);
    return kExitConfig;
  }

  Command command = Command::spectrum;
  for (const auto& [c, sub] : subs) {
    if (sub->parsed()) command = c;
  }

  try {
    json doc = opt.config.empty() ? json::object() : read_document(opt.config);
    for (const auto& s : opt.sets) apply_override(doc, s);
    if (!opt.check.empty()) doc["gates"]["check"] = opt.check;
    if (opt.seed) doc["seed"] = *opt.seed;
    if (!opt.out.empty()) doc["output"]["dir"] = opt.out;
    if (!opt.formats.empty()) doc["output"]["formats"] = opt.formats;

    if (!opt.sweep.empty()) return run_sweep(command, doc, opt);
    const auto record = execute(command, std::move(doc), opt.dry_run);
    std::cout << record.output.dump(2) << '\n';
    return record.exit_code;
  } catch (...) {
    const auto info = classify(std::current_exception());
    report_error(info, opt.json_errors);
    return info.exit_code;
  }
}
