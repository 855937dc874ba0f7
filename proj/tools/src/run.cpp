#include "run.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "problem_io.hpp"
#include "selftest.hpp"

namespace otecon::cli {

namespace {

int execute(const std::string& subcommand, const std::string& path, const Overrides& over,
            const std::string& out_path, std::ostream& out, std::ostream& err) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    err << "error: cannot read '" << path << "'\n";
    return 2;
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  const std::string raw = buffer.str();

  Json doc;
  try {
    doc = Json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    err << "error: " << path << " is not valid JSON: " << e.what() << "\n";
    return 2;
  }

  try {
    if (doc.contains("batch")) {
      if (!doc["batch"].is_array()) throw SchemaError("batch", "expected an array");
      for (std::size_t i = 0; i < doc["batch"].size(); ++i) {
        const Json& entry = doc["batch"][i];
        const std::string kind =
            entry.contains("kind") && entry["kind"].is_string() ? entry["kind"] : "";
        if (!kind_matches_subcommand(subcommand, kind))
          throw SchemaError("batch[" + std::to_string(i) + "].kind",
                            "kind '" + kind + "' does not belong to '" + subcommand + "'");
      }
    } else {
      const std::string kind =
          doc.contains("kind") && doc["kind"].is_string() ? doc["kind"] : "";
      if (!kind_matches_subcommand(subcommand, kind))
        throw SchemaError("kind",
                          "kind '" + kind + "' does not belong to '" + subcommand + "'");
    }
    auto [code, result] = run_document(doc, over, raw);
    const std::string text = result.dump(2);
    if (!out_path.empty()) {
      std::ofstream sink(out_path, std::ios::binary);
      if (!sink) {
        err << "error: cannot write '" << out_path << "'\n";
        return 2;
      }
      sink << text << "\n";
    }
    out << text << "\n";
    return code;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"otecon: discrete optimal transport solvers for economic applications", "otecon"};
  app.require_subcommand(1);

  static const std::vector<std::pair<std::string, std::string>> subcommands = {
      {"solve", "exact transport (kinds: ot, ot_unmatched)"},
      {"sinkhorn", "entropy-regularized transport (kind: entropic)"},
      {"invert", "inverse transport / moment fitting (kind: inverse)"},
      {"gravity", "gravity equation with masked diagonal (kind: gravity)"},
      {"match", "stable matching with singles (kind: matching)"},
      {"hedonic", "hedonic market reduction (kind: hedonic)"},
      {"choice", "discrete-choice demand inversion (kind: choice_invert)"},
      {"bounds", "option price bounds (kinds: bounds, bounds_martingale)"},
      {"qr", "quantile regression (kind: qr)"},
      {"vqr", "vector quantile regression (kind: vqr)"},
      {"quantile", "quantile transform as transport (kind: quantile_transform)"},
      {"game", "hide-and-seek game (kind: game)"},
      {"identify", "partial identification via set inclusion (kind: strassen)"}};

  struct Parsed {
    std::string file;
    double tol = -1.0;
    int max_iter = -1;
    double sigma = std::numeric_limits<double>::quiet_NaN();
    std::string out_path;
  };
  std::map<std::string, Parsed> parsed;
  for (const auto& [name, desc] : subcommands) {
    auto* sub = app.add_subcommand(name, desc);
    auto& slot = parsed[name];
    sub->add_option("file", slot.file, "problem file (JSON)")->required();
    sub->add_option("--tol", slot.tol, "override feasibility/marginal tolerance");
    sub->add_option("--max-iter", slot.max_iter, "override iteration cap");
    sub->add_option("--sigma", slot.sigma, "override the regularization temperature");
    sub->add_option("--out", slot.out_path, "also write the result document to this path");
  }
  auto* selftest = app.add_subcommand("selftest", "run the bundled acceptance suite");
  (void)selftest;

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends print through CLI11's own machinery.
      std::ostringstream help;
      help << app.help();
      out << help.str();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  if (selftest->parsed()) {
    auto results = run_acceptance();
    return print_acceptance_report(results, out);
  }
  for (const auto& [name, desc] : subcommands) {
    auto* sub = app.get_subcommand(name);
    if (!sub->parsed()) continue;
    const Parsed& slot = parsed[name];
    Overrides over;
    if (slot.tol > 0.0) over.tol = slot.tol;
    if (slot.max_iter > 0) over.max_iterations = slot.max_iter;
    if (!std::isnan(slot.sigma)) over.sigma = slot.sigma;
    return execute(name, slot.file, over, slot.out_path, out, err);
  }
  err << "error: no subcommand\n";
  return 2;
}

}  // namespace otecon::cli
