// groupcos command-line tool: score sentence pairs with the subspace
// projection cosine, train threshold classifiers, and evaluate them.
//
// Exit codes: 0 success, 1 I/O, 2 data (parse errors, out-of-vocabulary or
// empty inputs), 3 training degeneracy.

#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "groupcos/groupcos.hpp"

namespace {

using namespace groupcos;

struct RunConfig {
  std::string embeddings_path;
  std::string pairs_path;
  std::string train_pairs_path;
  std::string test_pairs_path;
  std::string model_path;
  std::string out_path;
  std::string measure = "projection_sim";
  std::string mode = "three_class";
  std::string objective = "macro_precision";
  std::string variant = "basis";
  std::string sim_combine = "mean";
  std::string format = "table";
  double fraction = 0.7;
  std::uint64_t seed = 42;
  double tolerance = kDefaultTolerance;
  bool dedup = false;
  bool compare = false;
  std::uint64_t limit = 0;

  ScoreOptions score_options() const {
    ScoreOptions options;
    options.measure = measure == "pairwise_mean" ? Measure::pairwise_mean : Measure::projection_sim;
    options.dedup = dedup;
    options.tolerance = tolerance;
    options.combine = sim_combine == "sum" ? SimCombine::sum : SimCombine::mean;
    options.path = variant == "gram" ? ProjectionPath::gram : ProjectionPath::basis;
    return options;
  }

  EmbeddingTable load_table() const {
    std::optional<std::size_t> entry_limit;
    if (limit > 0) entry_limit = static_cast<std::size_t>(limit);
    return load_embeddings(embeddings_path, entry_limit);
  }
};

SentenceVectors embed_text(const std::string& text, const EmbeddingTable& table, bool dedup,
                           const char* which) {
  try {
    return sentence_to_group(tokenize(text), table, dedup);
  } catch (const EmptySentenceGroup& e) {
    throw EmptySentenceGroup(std::string(which) + ": " + e.what());
  }
}

int run_sim(const RunConfig& config, const std::string& text1, const std::string& text2) {
  const EmbeddingTable table = config.load_table();
  const SentenceVectors side1 = embed_text(text1, table, config.dedup, "text1");
  const SentenceVectors side2 = embed_text(text2, table, config.dedup, "text2");

  SimOptions options;
  options.tolerance = config.tolerance;
  options.combine = config.sim_combine == "sum" ? SimCombine::sum : SimCombine::mean;
  options.path = config.variant == "gram" ? ProjectionPath::gram : ProjectionPath::basis;
  const SimilarityValue result = sim_symmetric(side1.group, side2.group, options);

  std::printf("sim\t%.6f\n", result.value);
  std::printf("a_to_b\t%.6f\n", result.a_vs_b);
  std::printf("b_to_a\t%.6f\n", result.b_vs_a);
  if (!side1.missing_tokens.empty() || !side2.missing_tokens.empty()) {
    std::printf("missing_tokens\t%zu\n",
                side1.missing_tokens.size() + side2.missing_tokens.size());
  }
  return 0;
}

int run_score(const RunConfig& config) {
  const EmbeddingTable table = config.load_table();
  const std::vector<PairRecord> records = load_pairs(config.pairs_path);
  const std::vector<ScoredPair> scored = score_pairs(records, table, config.score_options());
  if (config.out_path.empty()) {
    save_scores(scored, std::cout);
  } else {
    save_scores(scored, std::filesystem::path(config.out_path));
  }
  return 0;
}

void print_train_report(const TrainReport& report) {
  const auto bound_text = [](const std::optional<double>& bound) {
    char buffer[32];
    if (!bound) return std::string("--");
    std::snprintf(buffer, sizeof(buffer), "%.6f", *bound);
    return std::string(buffer);
  };
  std::printf("mode: %s\n", mode_name(report.mode));
  std::printf("Lower (a): %s\n", bound_text(report.lower_a).c_str());
  std::printf("Upper (b): %s\n", bound_text(report.upper_b).c_str());
  std::printf("objective: %s\n", objective_name(report.objective));
  std::printf("objective value (train): %.6f\n", report.objective_value);
  std::printf("macro recall (train): %.6f\n", report.macro_recall);
  std::printf("grid size: %zu\n", report.grid_size);
  std::printf("train pairs: %zu\n", report.train_pairs);
  std::printf("tie-break: %s\n", report.tie_break.c_str());
}

std::vector<PairRecord> training_records(const RunConfig& config) {
  if (!config.train_pairs_path.empty()) return load_pairs(config.train_pairs_path);
  const std::vector<PairRecord> records = load_pairs(config.pairs_path);
  SplitSpec spec;
  spec.train_fraction = config.fraction;
  spec.seed = config.seed;
  return split(records, spec).first;
}

std::vector<PairRecord> test_records(const RunConfig& config) {
  if (!config.test_pairs_path.empty()) return load_pairs(config.test_pairs_path);
  const std::vector<PairRecord> records = load_pairs(config.pairs_path);
  SplitSpec spec;
  spec.train_fraction = config.fraction;
  spec.seed = config.seed;
  return split(records, spec).second;
}

int run_train(const RunConfig& config) {
  const EmbeddingTable table = config.load_table();
  const std::vector<PairRecord> records = training_records(config);
  const std::vector<ScoredPair> scored = score_pairs(records, table, config.score_options());

  const ClassifierMode mode = mode_from_name(config.mode);
  const TrainObjective objective = objective_from_name(config.objective);
  const auto [model, report] = train(scored, mode, objective);

  print_train_report(report);
  std::size_t skipped = 0;
  for (const ScoredPair& entry : scored) skipped += entry.skipped() ? 1 : 0;
  std::printf("skipped pairs: %zu\n", skipped);

  if (!config.model_path.empty()) {
    save_model(model, report, config.model_path);
    std::printf("model written: %s\n", config.model_path.c_str());
  }
  return 0;
}

EvalReport evaluate_scored(const std::vector<ScoredPair>& scored, const ThresholdModel& model) {
  std::vector<int> golds;
  std::vector<int> preds;
  std::size_t skipped = 0;
  for (const ScoredPair& entry : scored) {
    if (entry.skipped()) {
      ++skipped;
      continue;
    }
    golds.push_back(merge_gold(entry.record.gold_class, model.mode));
    preds.push_back(predict(*entry.proximity, model));
  }
  return evaluate(confusion(golds, preds), skipped);
}

void print_eval_report(const EvalReport& report, const std::string& format) {
  if (format == "tsv") {
    std::fputs(to_tsv(report).c_str(), stdout);
  } else {
    std::fputs(to_table(report).c_str(), stdout);
  }
}

int run_eval(const RunConfig& config) {
  ModelFile model_file;
  try {
    model_file = load_model(config.model_path);
  } catch (const Error& e) {
    throw IoError(std::string("unreadable model: ") + e.what());
  }

  const EmbeddingTable table = config.load_table();
  const std::vector<PairRecord> records = test_records(config);

  std::vector<std::string> measures = {config.measure};
  if (config.compare) {
    measures = {"projection_sim", "pairwise_mean"};
  }
  for (const std::string& measure : measures) {
    RunConfig variant = config;
    variant.measure = measure;
    const std::vector<ScoredPair> scored = score_pairs(records, table, variant.score_options());
    const EvalReport report = evaluate_scored(scored, model_file.model);
    std::printf("measure: %s\n", measure.c_str());
    print_eval_report(report, config.format);
    if (config.compare && measure == measures.front()) std::printf("\n");
  }
  return 0;
}

// --- selftest ---------------------------------------------------------

struct SelfTest {
  int failures = 0;

  void check(bool ok, const std::string& label, const std::string& detail = "") {
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", label.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++failures;
  }
};

VectorGroup random_group(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Vector> rows(n, Vector(d));
  for (auto& row : rows) {
    for (double& x : row) x = dist(rng);
  }
  return VectorGroup(std::move(rows));
}

int run_selftest(std::uint64_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  SelfTest t;

  // Gram path vs basis path on random full-rank instances
  {
    double worst = 0.0;
    std::uint64_t done = 0;
    std::uint64_t redraws = 0;
    while (done < trials) {
      std::uniform_int_distribution<std::size_t> dim_dist(2, 16);
      const std::size_t d = dim_dist(rng);
      std::uniform_int_distribution<std::size_t> row_dist(1, d);
      const std::size_t n = row_dist(rng);
      const VectorGroup group = random_group(rng, n, d);
      Vector b(d);
      for (double& x : b) x = dist(rng);
      if (norm(b) == 0.0) continue;
      try {
        const double via_gram = cos_to_group_gram(b, group);
        const double via_basis = cos_to_group(b, build_projector(group));
        worst = std::max(worst, std::abs(via_gram - via_basis));
        ++done;
      } catch (const SingularGram&) {
        ++redraws;
      }
    }
    char detail[128];
    std::snprintf(detail, sizeof(detail), "max |gram - basis| = %.3g over %" PRIu64
                  " instances (%" PRIu64 " singular redraws)", worst, done, redraws);
    t.check(worst <= 1e-8, "projection oracle equivalence", detail);
  }

  // geometry invariants of the basis path
  {
    double worst_orth = 0.0, worst_pyth = 0.0, worst_idem = 0.0, worst_contract = 0.0;
    for (std::uint64_t i = 0; i < trials; ++i) {
      std::uniform_int_distribution<std::size_t> dim_dist(2, 16);
      const std::size_t d = dim_dist(rng);
      std::uniform_int_distribution<std::size_t> row_dist(1, d + 2);
      const VectorGroup group = random_group(rng, row_dist(rng), d);
      Vector b(d);
      for (double& x : b) x = dist(rng);
      const OrthonormalBasis basis = orthonormalize(group);
      const Vector p = project_onto_basis(b, basis);
      Vector h(d);
      for (std::size_t c = 0; c < d; ++c) h[c] = b[c] - p[c];
      for (const Vector& row : group.rows()) {
        const double scale = std::max(norm(b) * norm(row), 1e-300);
        worst_orth = std::max(worst_orth, std::abs(dot(h, row)) / scale);
      }
      const double nb2 = dot(b, b);
      worst_pyth = std::max(worst_pyth, std::abs(dot(p, p) + dot(h, h) - nb2) / std::max(nb2, 1e-300));
      const Vector pp = project_onto_basis(p, basis);
      for (std::size_t c = 0; c < d; ++c) {
        worst_idem = std::max(worst_idem, std::abs(pp[c] - p[c]));
      }
      worst_contract = std::max(worst_contract, norm(p) - norm(b));
    }
    t.check(worst_orth <= 1e-8, "residual orthogonality");
    t.check(worst_pyth <= 1e-8, "Pythagoras identity");
    t.check(worst_idem <= 1e-10, "projection idempotence");
    t.check(worst_contract <= 1e-12, "projection contraction");
  }

  // complexity contract: n + m evaluations, one factorization per group
  {
    std::mt19937_64 local(seed + 1);
    const VectorGroup a = random_group(local, 30, 8);
    const VectorGroup b = random_group(local, 50, 8);
    OpCounters::reset();
    const SimilarityValue sim = sim_symmetric(a, b);
    const std::uint64_t cosines = OpCounters::group_cosines.load();
    const std::uint64_t factorizations = OpCounters::orthonormalizations.load();
    t.check(sim.evaluations == 80 && cosines == 80,
            "evaluation count is n + m",
            "evaluations = " + std::to_string(cosines));
    t.check(factorizations == 2, "one orthonormalization per group",
            "orthonormalizations = " + std::to_string(factorizations));

    OpCounters::reset();
    const Projector projector = build_projector(a);
    for (int q = 0; q < 100; ++q) {
      Vector query(8);
      std::uniform_real_distribution<double> qdist(-1.0, 1.0);
      for (double& x : query) x = qdist(local);
      cos_to_group(query, projector);
    }
    t.check(OpCounters::orthonormalizations.load() == 1,
            "projector reuse avoids refactorization");
  }

  if (t.failures == 0) {
    std::printf("selftest: all checks passed\n");
    return 0;
  }
  std::printf("selftest: %d check(s) failed\n", t.failures);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"similarity of vector groups via subspace projection, with a "
               "paraphrase threshold-classification pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunConfig config;
  std::string text1, text2;
  std::uint64_t selftest_trials = 200;
  std::uint64_t selftest_seed = 12345;

  const auto add_common = [&](CLI::App* cmd, bool needs_embeddings) {
    if (needs_embeddings) {
      cmd->add_option("--embeddings", config.embeddings_path, "embedding table (word2vec text, optionally .gz)")
          ->required();
      cmd->add_option("--limit", config.limit, "load at most this many embedding entries");
      cmd->add_flag("--dedup", config.dedup, "collapse repeated tokens to one group row");
    }
    cmd->add_option("--tol", config.tolerance, "rank/singularity tolerance")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* sim_cmd = app.add_subcommand("sim", "score one sentence pair");
  add_common(sim_cmd, true);
  sim_cmd->add_option("text1", text1, "first sentence")->required();
  sim_cmd->add_option("text2", text2, "second sentence")->required();
  sim_cmd->add_option("--variant", config.variant, "projection route: basis or gram")
      ->check(CLI::IsMember({"basis", "gram"}));
  sim_cmd->add_option("--sim-combine", config.sim_combine, "per-direction combination: mean or sum")
      ->check(CLI::IsMember({"mean", "sum"}));

  CLI::App* score_cmd = app.add_subcommand("score", "batch-score a pair corpus");
  add_common(score_cmd, true);
  score_cmd->add_option("--pairs", config.pairs_path, "pair TSV: id, text1, text2, class")
      ->required();
  score_cmd->add_option("--out", config.out_path, "output TSV path (default: stdout)");
  score_cmd->add_option("--measure", config.measure, "projection_sim or pairwise_mean")
      ->check(CLI::IsMember({"projection_sim", "pairwise_mean"}));
  score_cmd->add_option("--variant", config.variant, "projection route: basis or gram")
      ->check(CLI::IsMember({"basis", "gram"}));
  score_cmd->add_option("--sim-combine", config.sim_combine, "mean or sum")
      ->check(CLI::IsMember({"mean", "sum"}));

  CLI::App* train_cmd = app.add_subcommand("train", "train threshold clipping constants");
  add_common(train_cmd, true);
  train_cmd->add_option("--pairs", config.pairs_path, "pair TSV split internally at --fraction");
  train_cmd->add_option("--train-pairs", config.train_pairs_path,
                        "externally fixed training pairs (skips the internal split)");
  train_cmd->add_option("--model", config.model_path, "model file to write");
  train_cmd->add_option("--mode", config.mode,
                        "three_class, two_class_merge_low or two_class_merge_high")
      ->check(CLI::IsMember({"three_class", "two_class_merge_low", "two_class_merge_high"}));
  train_cmd->add_option("--objective", config.objective, "macro_precision or accuracy")
      ->check(CLI::IsMember({"macro_precision", "accuracy"}));
  train_cmd->add_option("--fraction", config.fraction, "train fraction of the internal split")
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--seed", config.seed, "split shuffle seed");
  train_cmd->add_option("--measure", config.measure, "projection_sim or pairwise_mean")
      ->check(CLI::IsMember({"projection_sim", "pairwise_mean"}));
  train_cmd->add_option("--variant", config.variant, "projection route: basis or gram")
      ->check(CLI::IsMember({"basis", "gram"}));
  train_cmd->add_option("--sim-combine", config.sim_combine, "mean or sum")
      ->check(CLI::IsMember({"mean", "sum"}));

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a trained model");
  add_common(eval_cmd, true);
  eval_cmd->add_option("--pairs", config.pairs_path, "pair TSV split internally; the test part is evaluated");
  eval_cmd->add_option("--test-pairs", config.test_pairs_path,
                       "externally fixed test pairs (skips the internal split)");
  eval_cmd->add_option("--model", config.model_path, "model file to read")->required();
  eval_cmd->add_option("--fraction", config.fraction, "train fraction of the internal split")
      ->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--seed", config.seed, "split shuffle seed");
  eval_cmd->add_option("--measure", config.measure, "projection_sim or pairwise_mean")
      ->check(CLI::IsMember({"projection_sim", "pairwise_mean"}));
  eval_cmd->add_option("--variant", config.variant, "projection route: basis or gram")
      ->check(CLI::IsMember({"basis", "gram"}));
  eval_cmd->add_option("--sim-combine", config.sim_combine, "mean or sum")
      ->check(CLI::IsMember({"mean", "sum"}));
  eval_cmd->add_option("--format", config.format, "report format: table or tsv")
      ->check(CLI::IsMember({"table", "tsv"}));
  eval_cmd->add_flag("--compare", config.compare, "report both measures side by side");

  CLI::App* selftest_cmd =
      app.add_subcommand("selftest", "verify the Gram and basis projection routes agree");
  selftest_cmd->add_option("--trials", selftest_trials, "random instances per check");
  selftest_cmd->add_option("--seed", selftest_seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_cmd->parsed()) return run_sim(config, text1, text2);
    if (score_cmd->parsed()) return run_score(config);
    if (train_cmd->parsed()) {
      if (config.pairs_path.empty() && config.train_pairs_path.empty()) {
        throw IoError("train needs --pairs or --train-pairs");
      }
      return run_train(config);
    }
    if (eval_cmd->parsed()) {
      if (config.pairs_path.empty() && config.test_pairs_path.empty()) {
        throw IoError("eval needs --pairs or --test-pairs");
      }
      return run_eval(config);
    }
    if (selftest_cmd->parsed()) return run_selftest(selftest_trials, selftest_seed);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DegenerateTraining& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
