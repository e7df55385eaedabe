// Batch front end: `cds check <scenario.json>... [-o report.json]`, `cds examples [filter]`, `cds version`.
// Exit codes: 0 all checks pass, 1 some check fails, 2 input error.

#include <cds/scenario.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>

namespace {

struct Outcome {
  int code = 0;
  std::string report;  // serialized JSON, empty on input error
  std::string error;
};

Outcome run_file(const std::string& path) {
  Outcome o;
  try {
    const auto rep = cds::cli::run_scenario(cds::cli::load_scenario(path));
    o.code = rep.exit_code();
    o.report = rep.to_json().dump(2);
    for (const auto& c : rep.checks)
      if (c.verdict == "FAIL") o.error += path + ": FAIL " + c.name + "\n";
  } catch (const cds::cli::InputError& e) {
    o.code = 2;
    o.error = path + ": " + e.what() + "\n";
  } catch (const std::exception& e) {
    // anything escaping the pipelines is a numerical failure, not bad input
    o.code = 1;
    o.error = path + ": numerical failure: " + e.what() + "\n";
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupling Dirac structure toolkit: scenario checks"};
  app.require_subcommand(1);

  std::vector<std::string> files;
  std::string output;
  auto* check = app.add_subcommand("check", "run scenario files and print JSON reports");
  check->add_option("scenario", files, "scenario JSON files (run concurrently)")->required()->check(CLI::ExistingFile);
  check->add_option("-o,--output", output, "write the report here instead of stdout (single scenario only)");

  std::string filter;
  auto* examples = app.add_subcommand("examples", "list built-in examples");
  examples->add_option("filter", filter, "substring of the example name");

  app.add_subcommand("version", "print the tool version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (app.got_subcommand("version")) {
    std::cout << "cds " << cds::cli::kToolVersion << "\n";
    return 0;
  }
  if (app.got_subcommand("examples")) {
    for (const auto& e : cds::cli::list_examples(filter)) std::cout << e.name << "\t" << e.description << "\n";
    return 0;
  }

  if (!output.empty() && files.size() != 1) {
    std::cerr << "-o requires exactly one scenario\n";
    return 2;
  }
  std::vector<std::future<Outcome>> jobs;
  for (const auto& f : files) jobs.push_back(std::async(std::launch::async, run_file, f));
  int code = 0;
  for (auto& j : jobs) {
    const Outcome o = j.get();
    code = std::max(code, o.code);
    std::cerr << o.error;
    if (o.report.empty()) continue;
    if (output.empty()) {
      std::cout << o.report << "\n";
    } else {
      std::ofstream out(output);
      if (!out) {
        std::cerr << output << ": cannot write\n";
        return 2;
      }
      out << o.report << "\n";
    }
  }
  return code;
}
