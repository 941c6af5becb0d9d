#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cg/analysis.hpp"
#include "cg/backend.hpp"
#include "cg/dataset.hpp"
#include "cg/describe.hpp"
#include "cg/grammar.hpp"
#include "cg/harness.hpp"
#include "cg/perturb.hpp"
#include "cg/prompt.hpp"
#include "cg/render.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ProblemArgs {
  std::string id;
  fs::path corpus;
  std::uint64_t seed = 0;
  std::string policy = "coin";
};

void add_problem_args(CLI::App* cmd, ProblemArgs& a) {
  cmd->add_option("problem-id", a.id, "Problem id")->required();
  cmd->add_option("--corpus", a.corpus, "Canonical corpus directory")->required();
  cmd->add_option("--seed", a.seed, "Query-selection seed");
  cmd->add_option("--query-policy", a.policy, "held-out-pos|held-out-neg|coin");
}

cg::BongardProblem load_problem(const ProblemArgs& a) {
  const auto policy = cg::parse_query_policy(a.policy);
  if (!policy || *policy == cg::QueryPolicy::kBoth) {
    throw cg::Error(cg::Errc::kPrecondition, "query policy must be held-out-pos, held-out-neg or coin");
  }
  const cg::Corpus corpus = cg::Corpus::load(a.corpus);
  return cg::select_query(corpus.at(a.id), *policy, a.seed);
}

void print_image(const std::string& label, const cg::BongardImage& img, int figure) {
  std::cout << "# " << label << "\n" << cg::render_program(img) << "\n"
            << cg::render_description(img, figure).text() << "\n\n";
}

json problem_json(const cg::BongardProblem& p) {
  json j;
  j["id"] = p.id;
  j["split"] = cg::split_name(p.split);
  j["gold"] = cg::label_name(p.gold);
  j["positives"] = json::array();
  j["negatives"] = json::array();
  for (const auto& img : p.positives) j["positives"].push_back(cg::serialize_image(img));
  for (const auto& img : p.negatives) j["negatives"].push_back(cg::serialize_image(img));
  j["query"] = cg::serialize_image(p.query);
  return j;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic Bongard-LOGO evaluation toolkit", "bongard-cg"};
  app.require_subcommand(1);

  // import
  fs::path import_root, import_out;
  auto* import_cmd = app.add_subcommand("import", "Convert the upstream distribution into a canonical corpus");
  import_cmd->add_option("root", import_root, "Upstream dataset root")->required();
  import_cmd->add_option("--out", import_out, "Output corpus directory")->required();

  // sample
  fs::path sample_corpus, sample_out;
  std::size_t per_split = 500;
  std::uint64_t sample_seed = 0;
  std::string sample_policy = "coin";
  auto* sample_cmd = app.add_subcommand("sample", "Draw the per-split evaluation subset");
  sample_cmd->add_option("--corpus", sample_corpus, "Canonical corpus directory")->required();
  sample_cmd->add_option("--per-split", per_split, "Problems per split");
  sample_cmd->add_option("--seed", sample_seed, "Sampling seed")->required();
  sample_cmd->add_option("--query-policy", sample_policy, "held-out-pos|held-out-neg|coin|both");
  sample_cmd->add_option("--out", sample_out, "Manifest file")->required();

  // parse
  std::vector<std::string> tokens;
  auto* parse_cmd = app.add_subcommand("parse", "Parse action tokens (one shape) and print AP and AD forms");
  parse_cmd->add_option("tokens", tokens, "Action tokens")->required();

  // describe
  ProblemArgs describe_args;
  auto* describe_cmd = app.add_subcommand("describe", "Print AP and AD forms of a problem's images");
  add_problem_args(describe_cmd, describe_args);

  // render-svg
  ProblemArgs svg_args;
  fs::path svg_out;
  auto* svg_cmd = app.add_subcommand("render-svg", "Render a problem's 13 images as SVG files");
  add_problem_args(svg_cmd, svg_args);
  svg_cmd->add_option("--out", svg_out, "Output directory")->required();

  // perturb
  ProblemArgs perturb_args;
  std::string perturb_mode;
  std::uint64_t perturb_seed = 0;
  auto* perturb_cmd = app.add_subcommand("perturb", "Print a perturbed problem as JSON");
  perturb_cmd->add_option("problem-id", perturb_args.id, "Problem id")->required();
  perturb_cmd->add_option("--corpus", perturb_args.corpus, "Canonical corpus directory")->required();
  perturb_cmd->add_option("--query-seed", perturb_args.seed, "Query-selection seed");
  perturb_cmd->add_option("--query-policy", perturb_args.policy, "held-out-pos|held-out-neg|coin");
  perturb_cmd->add_option("--mode", perturb_mode, "categories|sequence")
      ->required()
      ->check(CLI::IsMember({"categories", "sequence"}));
  perturb_cmd->add_option("--seed", perturb_seed, "Perturbation run seed")->required();

  // prompt
  ProblemArgs prompt_args;
  std::string prompt_condition;
  auto* prompt_cmd = app.add_subcommand("prompt", "Print the exact prompt bundle for a problem");
  add_problem_args(prompt_cmd, prompt_args);
  prompt_cmd->add_option("--condition", prompt_condition, "Condition spec")->required();

  // run
  fs::path run_config, run_cache;
  bool run_no_cache = false;
  auto* run_cmd = app.add_subcommand("run", "Execute a run described by a TOML file");
  run_cmd->add_option("--config", run_config, "Run configuration (TOML)")->required();
  run_cmd->add_option("--cache-dir", run_cache, "Response cache directory (overrides the config)");
  run_cmd->add_flag("--no-cache", run_no_cache, "Bypass cached responses");

  // report
  std::vector<fs::path> report_logs, report_scores;
  std::string report_tables = "table1,fig2,grounded,shuffle,asymmetry,failures";
  std::string report_format = "md";
  fs::path report_out = "report";
  auto* report_cmd = app.add_subcommand("report", "Aggregate logs and score sheets into tables");
  report_cmd->add_option("--logs", report_logs, "JSONL record logs");
  report_cmd->add_option("--scores", report_scores, "Per-model score CSVs (model,condition,split,accuracy)");
  report_cmd->add_option("--tables", report_tables, "Comma-separated table names");
  report_cmd->add_option("--format", report_format, "md|csv")->check(CLI::IsMember({"md", "csv"}));
  report_cmd->add_option("--out", report_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*import_cmd) {
      cg::ImportReport report;
      const cg::Corpus corpus = cg::import_corpus(import_root, &report);
      corpus.save(import_out);
      for (cg::Split s : cg::kAllSplits) {
        const auto it = report.counts.find(s);
        std::cout << cg::split_name(s) << "\t" << (it == report.counts.end() ? 0 : it->second) << "\n";
      }
      std::cout << "total\t" << report.total() << "\n";
      for (const auto& s : report.skipped) std::cerr << "skipped: " << s << "\n";
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    } else if (*sample_cmd) {
      const auto policy = cg::parse_query_policy(sample_policy);
      if (!policy) throw cg::Error(cg::Errc::kPrecondition, "unknown query policy '" + sample_policy + "'");
      cg::SubsetSpec spec;
      spec.seed = sample_seed;
      for (auto& [split, n] : spec.per_split) n = per_split;
      const auto manifest = cg::sample_subset(cg::Corpus::load(sample_corpus), spec, *policy);
      manifest.save(sample_out);
      std::cout << manifest.ids.size() << " problems written to " << sample_out.string() << "\n";
    } else if (*parse_cmd) {
      const cg::BongardImage img = cg::parse_image(cg::TokenImage{cg::TokenShape(tokens.begin(), tokens.end())});
      for (const auto& w : cg::validate_image(img)) std::cerr << "warning: " << w << "\n";
      std::cout << cg::render_program(img) << "\n" << cg::render_description(img, 1).text() << "\n";
    } else if (*describe_cmd) {
      const auto p = load_problem(describe_args);
      int figure = 0;
      for (std::size_t i = 0; i < p.positives.size(); ++i) print_image("positive " + std::to_string(i + 1), p.positives[i], ++figure);
      for (std::size_t i = 0; i < p.negatives.size(); ++i) print_image("negative " + std::to_string(i + 1), p.negatives[i], ++figure);
      print_image("query", p.query, ++figure);
    } else if (*svg_cmd) {
      const auto p = load_problem(svg_args);
      fs::create_directories(svg_out);
      auto write = [&](const std::string& name, const cg::BongardImage& img) {
        const fs::path file = svg_out / (name + ".svg");
        std::ofstream(file) << cg::render_svg(img);
        std::cout << file.string() << "\n";
      };
      for (std::size_t i = 0; i < p.positives.size(); ++i) write("pos_" + std::to_string(i + 1), p.positives[i]);
      for (std::size_t i = 0; i < p.negatives.size(); ++i) write("neg_" + std::to_string(i + 1), p.negatives[i]);
      write("query", p.query);
    } else if (*perturb_cmd) {
      const auto p = load_problem(perturb_args);
      const std::uint64_t seed = cg::perturbation_seed(perturb_seed, p.id);
      const auto out = perturb_mode == "categories" ? cg::shuffle_categories(p, seed) : cg::shuffle_query_sequence(p, seed);
      std::cout << problem_json(out).dump(1) << "\n";
    } else if (*prompt_cmd) {
      const auto condition = cg::Condition::parse(prompt_condition);
      const auto p = load_problem(prompt_args);
      const auto bundle = cg::build_bundle(cg::apply_perturbation(p, condition), condition);
      std::cout << "=== SYSTEM ===\n" << bundle.system << "\n=== USER ===\n" << bundle.user << "=== IMAGES ===\n";
      for (const auto& img : bundle.images) std::cout << img.path.string() << "\n";
    } else if (*run_cmd) {
      cg::RunSpec spec = cg::RunSpec::load(run_config);
      if (!run_cache.empty()) spec.cache_dir = run_cache;
      if (run_no_cache) spec.cache_bypass = true;
      const auto s = cg::run(spec);
      json j{{"attempted", s.attempted},          {"skipped", s.skipped},
             {"completed", s.completed},          {"parse_failures", s.parse_failures},
             {"transport_failures", s.transport_failures}, {"correct", s.correct},
             {"accuracy", s.accuracy},            {"log", spec.log.string()}};
      std::cout << j.dump() << "\n";
    } else if (*report_cmd) {
      std::vector<cg::EvalRecord> records;
      for (const auto& log : report_logs) {
        auto part = cg::read_log(log);
        records.insert(records.end(), part.begin(), part.end());
      }
      cg::ScoreSheet sheet;
      for (const auto& f : report_scores) sheet.merge(cg::ScoreSheet::load_csv(f));
      sheet.merge(cg::ScoreSheet::from_records(records));
      if (sheet.empty()) throw cg::Error(cg::Errc::kEmptyGroup, "no records or scores given");
      const auto tables = cg::build_report(sheet, records, split_list(report_tables));
      const auto files = cg::emit_report(
          tables, report_format == "md" ? cg::ReportFormat::kMarkdown : cg::ReportFormat::kCsv, report_out);
      for (const auto& f : files) std::cout << f.string() << "\n";
    }
  } catch (const cg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
