#include <CLI11.hpp>

#include <iostream>

#include "mflab/errors.hpp"
#include "mflab/harness/commands.hpp"

using namespace mflab;
using namespace mflab::harness;

namespace {

void log_line(const std::string& msg) { std::cerr << msg << std::endl; }

std::filesystem::path out_dir_or(const std::optional<std::string>& out, const std::filesystem::path& fallback) {
  return out ? std::filesystem::path(*out) : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mflab: flow matching and MeanFlow experiments at desk scale"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  auto* gen = app.add_subcommand("gen-data", "Write the dataset, embedding table, corpus and manifest");
  gen->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "Override the config seed");
  gen->add_option("--out", out, "Override the output directory");

  std::string mode_text = "fm";
  std::optional<std::string> init_from;
  std::optional<std::int64_t> train_steps;
  bool resume = false;
  auto* tr = app.add_subcommand("train", "Train an fm or mf network");
  tr->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  tr->add_option("--mode", mode_text, "fm or mf")->check(CLI::IsMember({"fm", "mf"}));
  tr->add_option("--init-from", init_from, "fm checkpoint to start from")->check(CLI::ExistingFile);
  tr->add_option("--steps", train_steps, "Total training steps (overrides the config)");
  tr->add_option("--seed", seed, "Override the config seed");
  tr->add_option("--out", out, "Override the output directory");
  tr->add_flag("--resume", resume, "Continue from <out>/<mode>/latest.json");

  SampleOptions sopts;
  std::string checkpoint;
  std::optional<std::string> as_mode;
  auto* sa = app.add_subcommand("sample", "Draw samples from a checkpoint");
  sa->add_option("checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  sa->add_option("--steps", sopts.steps, "Number of sampling steps")->capture_default_str();
  sa->add_option("--conditions", sopts.conditions, "Condition ids (default: all)")->delimiter(',');
  sa->add_option("-N", sopts.n, "Samples per condition")->capture_default_str();
  sa->add_option("--seed", seed, "Noise seed (default: the checkpoint's seed)");
  sa->add_option("--as", as_mode, "Sample as fm (Euler) or mf (flow map)")->check(CLI::IsMember({"fm", "mf"}));
  sa->add_flag("--record-paths", sopts.record_paths, "Store every intermediate state");
  sa->add_option("--out", out, "Output directory (writes samples.jsonl)");

  EvalOptions eopts;
  std::string samples_path, dataset_path;
  auto* ev = app.add_subcommand("eval", "Score samples against a dataset");
  ev->add_option("samples", samples_path, "Samples JSONL")->required()->check(CLI::ExistingFile);
  ev->add_option("dataset", dataset_path, "Dataset JSONL from gen-data")->required()->check(CLI::ExistingFile);
  ev->add_flag("--force-digest", eopts.force_digest, "Compare even when config digests differ");
  ev->add_option("--out", out, "Output directory (writes report.json)");

  AnalyzeOptions aopts;
  std::string corpus_path, retrieval = "text-to-text";
  auto* an = app.add_subcommand("analyze", "Discriminability or disentanglement of an embedding corpus");
  an->add_option("corpus", corpus_path, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  an->add_option("--metric", aopts.metric, "discriminability or disentanglement")
      ->required()
      ->check(CLI::IsMember({"discriminability", "disentanglement"}));
  an->add_option("--k", aopts.k, "Retrieved neighbours per query")->capture_default_str();
  an->add_option("--rho", aopts.rho, "Fraction of tokens removed")->capture_default_str();
  an->add_option("--seed", aopts.seed, "Query selection / ablation seed")->capture_default_str();
  an->add_option("--query-count", aopts.query_count, "Number of queries")->capture_default_str();
  an->add_option("--retrieval", retrieval, "text-to-text or text-to-image")->capture_default_str();
  an->add_option("--out", out, "Output directory (writes report.json)");

  std::string recipe;
  auto* rp = app.add_subcommand("repro", "Run a named end-to-end experiment");
  rp->add_option("recipe", recipe, "Recipe name")->required();
  rp->add_option("--seed", seed, "Override the recipe seeds");
  rp->add_option("--out", out, "Output root (default: runs)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors are validation errors; --help and --version still exit 0.
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen) {
      const Json manifest = gen_data(resolve_config(config_path, seed, out));
      std::cout << manifest.dump(2) << "\n";
    } else if (*tr) {
      TrainOptions topts;
      topts.mode = net::parse_mode(mode_text);
      if (init_from) topts.init_from = *init_from;
      topts.steps = train_steps;
      topts.resume = resume;
      topts.log = log_line;
      const TrainOutcome res = train(resolve_config(config_path, seed, out), topts);
      std::cout << res.latest_checkpoint.string() << "\n";
    } else if (*sa) {
      sopts.checkpoint = checkpoint;
      sopts.seed = seed;
      if (as_mode) sopts.as = net::parse_mode(*as_mode);
      const SampleSet set = sample_checkpoint(sopts);
      const auto path = out_dir_or(out, ".") / "samples.jsonl";
      std::filesystem::create_directories(path.parent_path());
      save_sample_set(set, path);
      std::cout << path.string() << "\n";
    } else if (*ev) {
      eopts.samples = samples_path;
      eopts.dataset = dataset_path;
      const Json report = evaluate_samples(eopts);
      if (out) {
        std::filesystem::create_directories(*out);
        write_json_file(std::filesystem::path(*out) / "report.json", report);
      }
      std::cout << report.dump(2) << "\n";
    } else if (*an) {
      aopts.corpus = corpus_path;
      aopts.retrieval = enc::parse_retrieval_mode(retrieval);
      const Json report = analyze_corpus(aopts);
      if (out) {
        std::filesystem::create_directories(*out);
        write_json_file(std::filesystem::path(*out) / "report.json", report);
      }
      std::cout << report.dump(2) << "\n";
    } else if (*rp) {
      RecipeOptions ropts;
      ropts.out_dir = out_dir_or(out, "runs");
      ropts.seed = seed;
      ropts.log = log_line;
      const RecipeResult res = run_recipe(recipe, ropts);
      std::cout << format_table(res);
      return res.passed() ? kExitOk : kExitAcceptance;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}
