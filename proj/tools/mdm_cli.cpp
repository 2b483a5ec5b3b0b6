// mdm_cli: synth | train | features | eval

#include "mdm/checkpoint.hpp"
#include "mdm/classify.hpp"
#include "mdm/embed.hpp"
#include "mdm/feature_table.hpp"
#include "mdm/ingest.hpp"
#include "mdm/train.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SynthOpts {
  std::size_t users = 1000;
  double spam = 0.0445;
  double mean_length = 21.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainOpts {
  std::string events, labels, out;
  int d = 32, n = 6, k = 4, L = 4;
  double lambda = 1e-4;
  int epochs = 20;
  int embed_epochs = 10;
  double lr = 1e-3;
  double embed_lr = 1e-2;
  std::size_t pairs = 32;
  std::uint64_t seed = 0;
  std::string window = "s45";
  std::string components = "full";
  std::string relation_sum = "distinct";
  bool freeze_embed = false;
};

struct FeatureOpts {
  std::string events, labels, checkpoint, out;
  std::string which = "all";
  std::string feature_mode = "sum";
};

struct EvalOpts {
  std::string features, labels, out, name = "features";
  int seeds = 10;
  double test_fraction = 0.3;
  double threshold = 0.5;
  double C = 1.0;
};

void echo_config(const CLI::App& app, const fs::path& dir) {
  std::ofstream out(dir / "effective_config.toml");
  out << app.config_to_str(true, false);
}

mdm::Corpus load_corpus(const std::string& events_path, const std::string& labels_path,
                        std::vector<mdm::Event>* events_out = nullptr) {
  auto parsed = mdm::parse_events(fs::path(events_path));
  for (const auto& r : parsed.rejects)
    std::cerr << "warning: " << events_path << ":" << r.line << ": " << r.reason << "\n";
  const auto labels = mdm::parse_labels(fs::path(labels_path));
  auto corpus = mdm::build_sequences(parsed.events, labels);
  if (events_out) *events_out = std::move(parsed.events);
  return corpus;
}

int run_synth(const SynthOpts& o, const CLI::App& app) {
  const fs::path dir(o.out);
  fs::create_directories(dir);
  const auto s = mdm::synth_generate({o.users, o.spam, o.mean_length, o.seed});
  mdm::write_events(dir / "events.csv", s.events);
  mdm::write_labels(dir / "labels.csv", s.labels);
  echo_config(app, dir);
  std::cout << "users " << s.corpus.stats.users << " spammers " << s.corpus.stats.spammers
            << " interactions " << s.corpus.stats.interactions << "\n";
  return 0;
}

int run_train(const TrainOpts& o, const CLI::App& app) {
  const auto corpus = load_corpus(o.events, o.labels);
  if (corpus.stats.spammers == 0 || corpus.stats.normals == 0)
    throw std::invalid_argument("labels must contain both spammers and normal users");

  mdm::MdmHyper h;
  h.dim = o.d;
  h.window = o.n;
  h.depth_r = o.k;
  h.depth_e = o.L;
  h.window_mode = o.window == "eq5" ? mdm::WindowMode::kSkipLatest : mdm::WindowMode::kIncludeLatest;
  h.relation_sum = o.relation_sum == "occurrence" ? mdm::RelationSum::kOccurrence : mdm::RelationSum::kDistinct;
  static const std::map<std::string, mdm::Components> kComponents = {
      {"representation", mdm::Components::kRepresentation},
      {"long-term", mdm::Components::kLongTerm},
      {"individual", mdm::Components::kIndividual},
      {"full", mdm::Components::kFull}};
  h.components = kComponents.at(o.components);
  h.validate();

  const fs::path dir(o.out);
  fs::create_directories(dir);

  mdm::FitConfig fc;
  fc.hyper = h;
  fc.embed.epochs = o.embed_epochs;
  fc.embed.lr = o.embed_lr;
  fc.train.lambda = o.lambda;
  fc.train.epochs = o.epochs;
  fc.train.lr = o.lr;
  fc.train.pairs_per_batch = o.pairs;
  fc.train.freeze_embed = o.freeze_embed;
  fc.seed = o.seed;
  const auto result = mdm::fit_model(corpus, fc);

  mdm::save_checkpoint(dir / "model.mdm", result.params);
  mdm::write_loss_trace(dir / "loss_trace.csv", result.trace);
  {
    std::ofstream out(dir / "embed_trace.csv");
    char buf[32];
    for (std::size_t i = 0; i < result.embed_trace.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", result.embed_trace[i]);
      out << i + 1 << ',' << buf << '\n';
    }
  }
  echo_config(app, dir);
  if (!result.trace.empty())
    std::cout << "epochs " << result.trace.size() << " final pair loss " << result.trace.back().mean_pair_loss << "\n";
  return 0;
}

int run_features(const FeatureOpts& o, const CLI::App& app) {
  const bool want_mdm = o.which == "mdm" || o.which == "all";
  if (want_mdm && o.checkpoint.empty()) throw UsageError("--checkpoint is required for mdm features");

  std::vector<mdm::Event> events;
  const auto corpus = load_corpus(o.events, o.labels, &events);
  std::vector<mdm::FeatureTable> parts;
  if (o.which == "kgram" || o.which == "all") parts.push_back(mdm::kgram_table(corpus));
  if (o.which == "graph" || o.which == "all") parts.push_back(mdm::graph_table(events, corpus));
  if (want_mdm) {
    const auto ck = mdm::load_checkpoint(fs::path(o.checkpoint));
    if (!ck.model) throw std::invalid_argument("checkpoint holds embeddings only");
    const auto mode = o.feature_mode == "concat-all" ? mdm::FeatureMode::kConcatAll : mdm::FeatureMode::kSum;
    parts.push_back(mdm::mdm_table(corpus, *ck.model, mode));
  }
  const auto table = mdm::hconcat(parts);

  const fs::path dir(o.out);
  fs::create_directories(dir);
  mdm::write_feature_table(dir / "features.csv", table);
  echo_config(app, dir);
  std::cout << "rows " << table.users.size() << " columns " << table.columns.size() << "\n";
  return 0;
}

int run_eval(const EvalOpts& o, const CLI::App& app) {
  const auto table = mdm::read_feature_table(fs::path(o.features));
  const auto labels = mdm::parse_labels(fs::path(o.labels));
  const auto ds = mdm::align_labels(table, labels);
  mdm::LrConfig cfg;
  cfg.C = o.C;
  const auto results = mdm::evaluate_over_seeds(ds.X, ds.y, o.seeds, o.test_fraction, cfg, o.threshold);

  const fs::path dir(o.out);
  fs::create_directories(dir);
  std::ofstream out(dir / "report.csv");
  char buf[160];
  const auto emit = [&](const std::string& seed, double p, double r, double f) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f\n", o.name.c_str(), seed.c_str(), p, r, f);
    out << buf;
    std::cout << buf;
  };
  out << "features,seed,precision,recall,f_measure\n";
  std::cout << "features,seed,precision,recall,f_measure\n";
  std::vector<double> P, R, F;
  for (const auto& r : results) {
    P.push_back(r.metrics.precision());
    R.push_back(r.metrics.recall());
    F.push_back(r.metrics.f_measure());
    emit(std::to_string(r.seed), P.back(), R.back(), F.back());
  }
  const auto p = mdm::mean_std(P), r = mdm::mean_std(R), f = mdm::mean_std(F);
  emit("mean", p.mean, r.mean, f.mean);
  emit("std", p.std, r.std, f.std);
  echo_config(app, dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-level dependency model for spammer detection"};
  app.set_config("--config", "", "TOML config file; command-line flags take precedence");
  app.require_subcommand(1);

  SynthOpts so;
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic interaction log");
  synth->add_option("--users", so.users, "Number of users")->capture_default_str();
  synth->add_option("--spam", so.spam, "Spammer fraction")->capture_default_str();
  synth->add_option("--mean-length", so.mean_length, "Mean sequence length")->capture_default_str();
  synth->add_option("--seed", so.seed, "Random seed")->capture_default_str();
  synth->add_option("--out", so.out, "Output directory")->required();

  TrainOpts to;
  auto* train = app.add_subcommand("train", "Pre-train embeddings, then fit the ranking model");
  train->add_option("--events", to.events)->required()->check(CLI::ExistingFile);
  train->add_option("--labels", to.labels)->required()->check(CLI::ExistingFile);
  train->add_option("--out", to.out, "Output directory")->required();
  train->add_option("--d", to.d, "Embedding dimension")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--n", to.n, "Recent window length")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--k", to.k, "Individual-level depth")->capture_default_str()->check(CLI::NonNegativeNumber);
  train->add_option("--L", to.L, "Union-level depth")->capture_default_str()->check(CLI::NonNegativeNumber);
  train->add_option("--lambda", to.lambda, "Weight decay")->capture_default_str();
  train->add_option("--epochs", to.epochs, "Ranking epochs")->capture_default_str();
  train->add_option("--embed-epochs", to.embed_epochs, "Embedding epochs")->capture_default_str();
  train->add_option("--lr", to.lr, "Ranking learning rate")->capture_default_str();
  train->add_option("--embed-lr", to.embed_lr, "Embedding learning rate")->capture_default_str();
  train->add_option("--pairs", to.pairs, "Pairs per batch")->capture_default_str();
  train->add_option("--seed", to.seed, "Random seed")->capture_default_str();
  train->add_option("--window", to.window, "Window layout")->capture_default_str()->check(CLI::IsMember({"s45", "eq5"}));
  train->add_option("--components", to.components, "Model variant")
      ->capture_default_str()
      ->check(CLI::IsMember({"representation", "long-term", "individual", "full"}));
  train->add_option("--relation-sum", to.relation_sum, "Relation embedding sum")
      ->capture_default_str()
      ->check(CLI::IsMember({"distinct", "occurrence"}));
  train->add_flag("--freeze-embed", to.freeze_embed, "Keep pre-trained embeddings fixed");

  FeatureOpts fo;
  auto* features = app.add_subcommand("features", "Extract a feature matrix");
  features->add_option("--events", fo.events)->required()->check(CLI::ExistingFile);
  features->add_option("--labels", fo.labels)->required()->check(CLI::ExistingFile);
  features->add_option("--checkpoint", fo.checkpoint, "Model checkpoint (mdm features)");
  features->add_option("--which", fo.which)->capture_default_str()->check(CLI::IsMember({"mdm", "kgram", "graph", "all"}));
  features->add_option("--feature-mode", fo.feature_mode)->capture_default_str()->check(CLI::IsMember({"sum", "concat-all"}));
  features->add_option("--out", fo.out, "Output directory")->required();

  EvalOpts eo;
  auto* eval = app.add_subcommand("eval", "Repeated-split logistic regression evaluation");
  eval->add_option("--features", eo.features)->required()->check(CLI::ExistingFile);
  eval->add_option("--labels", eo.labels)->required()->check(CLI::ExistingFile);
  eval->add_option("--seeds", eo.seeds, "Number of split seeds")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--test-fraction", eo.test_fraction)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  eval->add_option("--threshold", eo.threshold)->capture_default_str();
  eval->add_option("--C", eo.C, "Inverse regularisation strength")->capture_default_str();
  eval->add_option("--name", eo.name, "Feature set name for the report")->capture_default_str();
  eval->add_option("--out", eo.out, "Output directory")->required();

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
    if (synth->parsed()) return run_synth(so, app);
    if (train->parsed()) return run_train(to, app);
    if (features->parsed()) return run_features(fo, app);
    if (eval->parsed()) return run_eval(eo, app);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
