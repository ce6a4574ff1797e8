// absatag: aspect extraction and joint aspect+sentiment sequence tagging.
//
// Commands: ingest, stats, train, crossval, eval, predict, adapt.
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "absatag/adaptation.hpp"
#include "absatag/checkpoint.hpp"
#include "absatag/corpus.hpp"
#include "absatag/evaluation.hpp"
#include "absatag/features.hpp"
#include "absatag/model.hpp"
#include "absatag/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace absatag;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Sentence> load_corpus(const std::string& path,
                                  const std::string& format,
                                  const std::string& ann_path = "") {
  if (format == "semeval-xml") return parse_semeval_xml(read_file(path));
  if (format == "brat") {
    if (ann_path.empty())
      throw std::invalid_argument("brat format needs the .txt and .ann files");
    return parse_brat(read_file(path), read_file(ann_path));
  }
  if (format == "canonical") return read_canonical(path);
  throw std::invalid_argument("unknown corpus format: " + format);
}

// Output directories are never silently reused: first free of
// <root>/<name>, <root>/<name>-2, <root>/<name>-3, ...
fs::path claim_run_dir(const std::string& root, const std::string& name) {
  const fs::path base = fs::path(root) / name;
  fs::path dir = base;
  for (int suffix = 2; fs::exists(dir); ++suffix)
    dir = fs::path(root) / (name + "-" + std::to_string(suffix));
  fs::create_directories(dir);
  return dir;
}

std::string default_out_root() {
  if (const char* env = std::getenv("ABSATAG_OUT_ROOT")) return env;
  return "runs";
}

// ---- shared train/crossval options ------------------------------------------

struct RunOptions {
  std::string corpus;
  std::string val_corpus;
  double val_fraction = 0.0;
  std::string arch = "arnn";
  std::string mode = "ae";
  bool unidirectional = false;
  bool bidirectional = false;
  std::size_t hidden = 100;
  std::size_t window = 0;  // size 1|3|5; 0 = architecture default
  double keep = 1.0;
  bool features = false;
  std::string feature_table;
  std::string embeddings;
  std::string embedding_format = "word2vec";
  std::size_t dim = 50;
  double lr = 0.0;  // 0 = architecture default
  double decay = 0.9;
  std::size_t batch = 0;  // 0 = architecture default
  std::size_t max_len = 200;
  long max_epochs = -1;  // -1 = architecture default
  long max_steps = -1;
  long patience = -1;
  long eval_every = -1;
  double clip = 5.0;
  std::uint64_t seed = 1;
  std::size_t k = 5;
  std::size_t jobs = 1;
  bool freeze_embeddings = false;
  bool append_final_hidden = false;
  std::string out_root = default_out_root();
  std::string name = "run";

  bool is_arnn() const { return arch == "arnn"; }

  void resolve_defaults() {
    const bool bi = is_arnn() ? !unidirectional
                              : (arch == "birnn" || arch == "bilstm");
    if (window == 0) window = bi ? 1 : 3;
    if (window != 1 && window != 3 && window != 5)
      throw std::invalid_argument("window size must be 1, 3 or 5");
    if (lr == 0.0) lr = 0.01;
    if (batch == 0) batch = is_arnn() ? 16 : 1;
    if (max_epochs < 0) max_epochs = is_arnn() ? 0 : 5;
    if (max_steps < 0) max_steps = is_arnn() ? 2000 : 0;
    if (patience < 0) patience = is_arnn() ? 1000 : 0;
    if (eval_every < 0) eval_every = is_arnn() ? 100 : 0;
    if (max_epochs == 0 && max_steps == 0)
      throw std::invalid_argument("either --max-epochs or --max-steps must be set");
  }

  ModelConfig model_config() const {
    ModelConfig mc;
    mc.architecture = architecture_from_string(arch);
    mc.bidirectional = arch == "birnn" || arch == "bilstm";
    if (mc.architecture == Architecture::ARNN)
      mc.bidirectional = !unidirectional;
    if (bidirectional) mc.bidirectional = true;
    mc.hidden_size = hidden;
    mc.window_radius = (window - 1) / 2;
    mc.dropout_keep = keep;
    mc.use_features = features;
    mc.scheme = mode == "aesc" ? SchemeMode::AESC : SchemeMode::AE;
    mc.embedding_dim = dim;
    mc.train_embeddings = !freeze_embeddings;
    mc.append_final_hidden = append_final_hidden;
    return mc;
  }

  TrainConfig train_config() const {
    TrainConfig tc;
    tc.learning_rate = lr;
    tc.decay_ratio = decay;
    tc.batch_size = batch;
    tc.max_len = max_len;
    tc.max_epochs = static_cast<std::size_t>(max_epochs);
    tc.max_steps = static_cast<std::size_t>(max_steps);
    tc.patience_steps = static_cast<std::size_t>(patience);
    tc.eval_every_steps = static_cast<std::size_t>(eval_every);
    tc.clip_norm = clip;
    tc.seed = seed;
    return tc;
  }

  json echo() const {
    return json{{"corpus", corpus},
                {"val_corpus", val_corpus},
                {"val_fraction", val_fraction},
                {"arch", arch},
                {"mode", mode},
                {"unidirectional", unidirectional},
                {"bidirectional", bidirectional},
                {"hidden", hidden},
                {"window", window},
                {"keep", keep},
                {"features", features},
                {"feature_table", feature_table},
                {"embeddings", embeddings},
                {"embedding_format", embedding_format},
                {"dim", dim},
                {"lr", lr},
                {"decay", decay},
                {"batch", batch},
                {"max_len", max_len},
                {"max_epochs", max_epochs},
                {"max_steps", max_steps},
                {"patience", patience},
                {"eval_every", eval_every},
                {"clip", clip},
                {"seed", seed},
                {"k", k},
                {"jobs", jobs},
                {"freeze_embeddings", freeze_embeddings},
                {"append_final_hidden", append_final_hidden},
                {"out_root", out_root},
                {"name", name}};
  }
};

// One entry per flag so config-file loading and flag overrides stay in sync.
struct RunField {
  std::string flag;
  std::string key;
  std::function<void(RunOptions&, const json&)> from_json;
  std::function<void(RunOptions&, const RunOptions&)> copy;
};

std::vector<RunField> run_fields() {
  std::vector<RunField> fields;
  const auto add = [&fields](const char* flag, const char* key, auto member) {
    fields.push_back(
        {flag, key,
         [member](RunOptions& o, const json& j) {
           o.*member = j.get<std::decay_t<decltype(std::declval<RunOptions>().*member)>>();
         },
         [member](RunOptions& into, const RunOptions& from) {
           into.*member = from.*member;
         }});
  };
  add("--corpus", "corpus", &RunOptions::corpus);
  add("--val", "val_corpus", &RunOptions::val_corpus);
  add("--val-fraction", "val_fraction", &RunOptions::val_fraction);
  add("--arch", "arch", &RunOptions::arch);
  add("--mode", "mode", &RunOptions::mode);
  add("--unidirectional", "unidirectional", &RunOptions::unidirectional);
  add("--bidirectional", "bidirectional", &RunOptions::bidirectional);
  add("--hidden", "hidden", &RunOptions::hidden);
  add("--window", "window", &RunOptions::window);
  add("--keep", "keep", &RunOptions::keep);
  add("--features", "features", &RunOptions::features);
  add("--feature-table", "feature_table", &RunOptions::feature_table);
  add("--embeddings", "embeddings", &RunOptions::embeddings);
  add("--embedding-format", "embedding_format", &RunOptions::embedding_format);
  add("--dim", "dim", &RunOptions::dim);
  add("--lr", "lr", &RunOptions::lr);
  add("--decay", "decay", &RunOptions::decay);
  add("--batch", "batch", &RunOptions::batch);
  add("--max-len", "max_len", &RunOptions::max_len);
  add("--max-epochs", "max_epochs", &RunOptions::max_epochs);
  add("--max-steps", "max_steps", &RunOptions::max_steps);
  add("--patience", "patience", &RunOptions::patience);
  add("--eval-every", "eval_every", &RunOptions::eval_every);
  add("--clip", "clip", &RunOptions::clip);
  add("--seed", "seed", &RunOptions::seed);
  add("--k", "k", &RunOptions::k);
  add("--jobs", "jobs", &RunOptions::jobs);
  add("--freeze-embeddings", "freeze_embeddings", &RunOptions::freeze_embeddings);
  add("--append-final-hidden", "append_final_hidden",
      &RunOptions::append_final_hidden);
  add("--out", "out_root", &RunOptions::out_root);
  add("--name", "name", &RunOptions::name);
  return fields;
}

void add_run_flags(CLI::App* cmd, RunOptions& opt, std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config file; flags override");
  cmd->add_option("--corpus", opt.corpus, "canonical corpus (JSON lines)");
  cmd->add_option("--val", opt.val_corpus, "validation corpus");
  cmd->add_option("--val-fraction", opt.val_fraction,
                  "carve this share off the corpus as validation");
  cmd->add_option("--arch", opt.arch, "arnn | rnn | jrnn | lstm | birnn | bilstm");
  cmd->add_option("--mode", opt.mode, "ae | aesc");
  cmd->add_flag("--unidirectional", opt.unidirectional,
                "single-direction first pass (arnn)");
  cmd->add_flag("--bidirectional", opt.bidirectional,
                "force a bidirectional encoder");
  cmd->add_option("--hidden", opt.hidden, "hidden state size");
  cmd->add_option("--window", opt.window, "context window size: 1, 3 or 5");
  cmd->add_option("--keep", opt.keep, "dropout keep probability");
  cmd->add_flag("--features", opt.features, "use the 14 linguistic features");
  cmd->add_option("--feature-table", opt.feature_table,
                  "JSON feature table replacing the default layout");
  cmd->add_option("--embeddings", opt.embeddings, "embedding text file");
  cmd->add_option("--embedding-format", opt.embedding_format, "word2vec | glove");
  cmd->add_option("--dim", opt.dim, "random embedding size when no file given");
  cmd->add_option("--lr", opt.lr, "initial learning rate");
  cmd->add_option("--decay", opt.decay, "per-epoch lr decay ratio");
  cmd->add_option("--batch", opt.batch, "mini-batch size");
  cmd->add_option("--max-len", opt.max_len, "padding cap in tokens");
  cmd->add_option("--max-epochs", opt.max_epochs, "epoch budget (0 = off)");
  cmd->add_option("--max-steps", opt.max_steps, "step budget (0 = off)");
  cmd->add_option("--patience", opt.patience,
                  "stop after this many steps without F1 improvement");
  cmd->add_option("--eval-every", opt.eval_every,
                  "validation cadence in steps (0 = per epoch)");
  cmd->add_option("--clip", opt.clip, "global gradient norm clip (0 = off)");
  cmd->add_option("--seed", opt.seed, "global seed");
  cmd->add_option("--k", opt.k, "number of folds");
  cmd->add_option("--jobs", opt.jobs, "parallel fold workers");
  cmd->add_flag("--freeze-embeddings", opt.freeze_embeddings,
                "do not update the embedding table");
  cmd->add_flag("--append-final-hidden", opt.append_final_hidden,
                "feed h_n to the decoder as extra input");
  cmd->add_option("--out", opt.out_root, "output root directory");
  cmd->add_option("--name", opt.name, "run name under the output root");
}

// File values first, then any flag that was actually passed wins.
RunOptions resolve_options(CLI::App* cmd, const RunOptions& flags,
                           const std::string& config_path) {
  if (config_path.empty()) return flags;
  RunOptions merged;
  const json j = json::parse(read_file(config_path));
  for (const RunField& f : run_fields()) {
    if (j.contains(f.key)) f.from_json(merged, j.at(f.key));
    const CLI::Option* opt = cmd->get_option_no_throw(f.flag);
    if (opt && opt->count() > 0) f.copy(merged, flags);
  }
  return merged;
}

EmbeddingTable build_embeddings(const RunOptions& opt,
                                std::span<const Sentence> corpus, Rng& rng) {
  if (opt.embeddings.empty())
    return EmbeddingTable::random(corpus, opt.dim, rng);
  if (!fs::exists(opt.embeddings))
    throw std::runtime_error("embedding file not found: " + opt.embeddings +
                             " (pass a valid --embeddings or drop it for "
                             "random initialization)");
  const EmbeddingFormat fmt = opt.embedding_format == "glove"
                                  ? EmbeddingFormat::GloveText
                                  : EmbeddingFormat::Word2VecText;
  return EmbeddingTable::load(read_file(opt.embeddings), fmt, rng);
}

std::optional<FeatureExtractor> build_features(const RunOptions& opt,
                                               std::span<const Sentence> corpus) {
  if (!opt.features) return std::nullopt;
  FeatureTable table = opt.feature_table.empty()
                           ? FeatureTable::default_table()
                           : FeatureTable::from_json(read_file(opt.feature_table));
  bool has_pred = false;
  for (const Sentence& s : corpus)
    for (const Token& t : s.tokens)
      if (!t.pred_iob.empty()) {
        has_pred = true;
        break;
      }
  return FeatureExtractor(std::move(table), has_pred);
}

struct TrainedRun {
  Model model;
  TrainResult result;
  double wall_time_s = 0.0;
};

TrainedRun run_training(const RunOptions& opt,
                        std::span<const Sentence> train_set,
                        std::span<const Sentence> val_set, std::uint64_t seed,
                        std::ostream* log) {
  RunOptions local = opt;
  local.seed = seed;
  ModelConfig mc = local.model_config();
  Rng rng(seed);
  EmbeddingTable table = build_embeddings(local, train_set, rng);
  mc.embedding_dim = table.dim();
  std::optional<FeatureExtractor> fx = build_features(local, train_set);
  if (fx) mc.feature_dim = fx->dim();
  Model model(mc, std::move(table), rng, std::move(fx));

  const auto started = std::chrono::steady_clock::now();
  ProgressFn progress;
  if (log) {
    progress = [log](const TrainStepRecord& rec) {
      (*log) << "step " << rec.step << " epoch " << rec.epoch << " lr " << rec.lr
             << " loss " << rec.train_loss;
      if (rec.val_f1) (*log) << " val_f1 " << *rec.val_f1;
      (*log) << '\n';
      log->flush();
    };
  }
  TrainedRun run{std::move(model), TrainResult{}, 0.0};
  run.result = train(run.model, train_set, val_set, local.train_config(), progress);
  run.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return run;
}

json summary_json(const RunOptions& opt, const TrainedRun& run) {
  return json{{"best_f1", run.result.best_f1},
              {"best_step", run.result.best_step},
              {"steps", run.result.steps},
              {"epochs", run.result.epochs},
              {"early_stopped", run.result.early_stopped},
              {"truncated_sentences", run.result.truncated},
              {"wall_time_s", run.wall_time_s},
              {"config", opt.echo()}};
}

// ---- commands ----------------------------------------------------------------

int cmd_ingest(const std::string& input, const std::string& ann,
               const std::string& format, const std::string& out) {
  const std::vector<Sentence> corpus = load_corpus(input, format, ann);
  write_canonical(out, corpus);
  std::cout << corpus_stats(corpus).to_table();
  std::cerr << "wrote " << corpus.size() << " sentences to " << out << '\n';
  return 0;
}

int cmd_stats(const std::string& input, const std::string& ann,
              const std::string& format, bool as_json) {
  const std::vector<Sentence> corpus = load_corpus(input, format, ann);
  const CorpusStats stats = corpus_stats(corpus);
  std::cout << (as_json ? stats.to_json() + "\n" : stats.to_table());
  return 0;
}

int cmd_train(RunOptions opt) {
  opt.resolve_defaults();
  opt.model_config().validate();  // usage errors before any filesystem writes
  if (opt.corpus.empty()) throw std::invalid_argument("train needs --corpus");
  std::vector<Sentence> corpus = read_canonical(opt.corpus);
  std::vector<Sentence> val;
  if (!opt.val_corpus.empty()) {
    val = read_canonical(opt.val_corpus);
  } else if (opt.val_fraction > 0.0) {
    Rng rng(opt.seed ^ 0x5eedULL);
    for (std::size_t i = corpus.size(); i > 1; --i)
      std::swap(corpus[i - 1], corpus[rng.index(i)]);
    const std::size_t n_val = static_cast<std::size_t>(
        std::llround(opt.val_fraction * static_cast<double>(corpus.size())));
    val.assign(corpus.end() - static_cast<long>(n_val), corpus.end());
    corpus.resize(corpus.size() - n_val);
  }

  const fs::path dir = claim_run_dir(opt.out_root, opt.name);
  std::ofstream(dir / "config.echo.json") << opt.echo().dump(2) << '\n';
  std::ofstream log(dir / "train.log");
  TrainedRun run = run_training(opt, corpus, val, opt.seed, &log);
  save_checkpoint((dir / "checkpoint.bin").string(), run.model);
  const json summary = summary_json(opt, run);
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
  std::cout << summary.dump(2) << '\n';
  std::cerr << "run directory: " << dir.string() << '\n';
  return 0;
}

int cmd_crossval(RunOptions opt, const std::vector<std::string>& compare) {
  if (!compare.empty()) {
    std::vector<double> samples[2];
    for (int i = 0; i < 2; ++i) {
      const fs::path p = fs::path(compare[i]) / "folds.json";
      samples[i] = json::parse(read_file(p.string()))
                       .at("test_f1")
                       .get<std::vector<double>>();
    }
    const SignificanceResult sig = ttest_two_sided(samples[0], samples[1]);
    const json out{{"run_a", compare[0]}, {"run_b", compare[1]},
                   {"t", sig.t},          {"df", sig.df},
                   {"p", sig.p},          {"degenerate", sig.degenerate}};
    std::cout << out.dump(2) << '\n';
    return 0;
  }

  opt.resolve_defaults();
  opt.model_config().validate();
  if (opt.corpus.empty()) throw std::invalid_argument("crossval needs --corpus");
  std::vector<Sentence> corpus = read_canonical(opt.corpus);

  // source-domain sentences (WEIGHTED augmentation) stay in every train part
  std::vector<Sentence> target, source;
  for (Sentence& s : corpus)
    (s.from_source_domain ? source : target).push_back(std::move(s));

  const std::vector<Fold> folds = kfold_split(target.size(), opt.k, 0.1, opt.seed);
  const fs::path dir = claim_run_dir(opt.out_root, opt.name);
  std::ofstream(dir / "config.echo.json") << opt.echo().dump(2) << '\n';

  std::vector<json> fold_reports(folds.size());
  std::vector<double> test_f1(folds.size());
  std::mutex mu;
  std::size_t next_fold = 0;
  const Rng base(opt.seed);

  const auto worker = [&]() {
    for (;;) {
      std::size_t f;
      {
        const std::lock_guard<std::mutex> lock(mu);
        if (next_fold >= folds.size()) return;
        f = next_fold++;
      }
      std::vector<Sentence> train_set, val_set, test_set;
      for (std::size_t i : folds[f].train) train_set.push_back(target[i]);
      for (const Sentence& s : source) train_set.push_back(s);
      for (std::size_t i : folds[f].validation) val_set.push_back(target[i]);
      for (std::size_t i : folds[f].test) test_set.push_back(target[i]);

      const fs::path fold_dir = dir / ("fold_" + std::to_string(f));
      fs::create_directories(fold_dir);
      std::ofstream log(fold_dir / "train.log");
      Rng fold_rng = base.fork(f);
      TrainedRun run =
          run_training(opt, train_set, val_set, fold_rng.next_u64(), &log);
      const EvalReport report = evaluate_model(run.model, test_set);
      save_checkpoint((fold_dir / "checkpoint.bin").string(), run.model);
      std::ofstream(fold_dir / "report.json") << report.to_json() << '\n';
      {
        const std::lock_guard<std::mutex> lock(mu);
        test_f1[f] = report.joint.f1;
        fold_reports[f] = json{{"fold", f},
                               {"test_f1", report.joint.f1},
                               {"single_f1", report.single.f1},
                               {"val_best_f1", run.result.best_f1},
                               {"steps", run.result.steps}};
      }
    }
  };

  std::vector<std::thread> pool;
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(opt.jobs, folds.size()));
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  double mean = 0.0;
  for (double f1 : test_f1) mean += f1;
  mean /= static_cast<double>(test_f1.size());
  double var = 0.0;
  for (double f1 : test_f1) var += (f1 - mean) * (f1 - mean);
  const double stddev = test_f1.size() > 1
                            ? std::sqrt(var / static_cast<double>(test_f1.size() - 1))
                            : 0.0;

  const json out{{"folds", fold_reports},
                 {"test_f1", test_f1},
                 {"mean_f1", mean},
                 {"std_f1", stddev},
                 {"k", opt.k}};
  std::ofstream(dir / "folds.json") << out.dump(2) << '\n';
  std::cout << out.dump(2) << '\n';
  std::cerr << "run directory: " << dir.string() << '\n';
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& corpus_path,
             bool as_json) {
  Model model = load_checkpoint(checkpoint);
  const std::vector<Sentence> corpus = read_canonical(corpus_path);
  const EvalReport report = evaluate_model(model, corpus);
  std::cout << (as_json ? report.to_json() + "\n" : report.to_table());
  return 0;
}

int cmd_predict(const std::string& checkpoint, const std::string& corpus_path,
                const std::string& out_path) {
  Model model = load_checkpoint(checkpoint);
  const TagScheme scheme(model.config().scheme);
  const std::vector<Sentence> corpus = read_canonical(corpus_path);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot write: " + out_path);
    out = &file;
  }
  for (const Sentence& s : corpus) {
    const std::vector<int> gold = encode_tags(s, scheme).labels;
    const std::vector<int> pred = model.predict(s);
    for (std::size_t i = 0; i < s.tokens.size(); ++i)
      (*out) << s.tokens[i].surface << '\t' << scheme.label(gold[i]) << '\t'
             << scheme.label(pred[i]) << '\n';
    (*out) << '\n';
  }
  return 0;
}

int cmd_adapt(const std::string& method, const std::string& src_path,
              const std::string& tgt_path, double weight,
              const std::string& src_model_path, const std::string& out_path,
              std::uint64_t seed) {
  const std::vector<Sentence> tgt = read_canonical(tgt_path);
  json sidecar{{"method", method}, {"tgt", tgt_path}};
  std::vector<Sentence> augmented;
  if (method == "weighted") {
    if (src_path.empty()) throw std::invalid_argument("weighted needs --src");
    const std::vector<Sentence> src = read_canonical(src_path);
    augmented = weighted_union(src, tgt, weight, seed);
    sidecar["src"] = src_path;
    sidecar["weight"] = weight;
    sidecar["seed"] = seed;
  } else if (method == "pred") {
    if (src_model_path.empty())
      throw std::invalid_argument("pred needs --src-model");
    Model src_model = load_checkpoint(src_model_path);
    augmented = pred_augment(src_model, tgt);
    sidecar["src_model"] = src_model_path;
    sidecar["src_model_digest"] = checkpoint_digest(src_model_path);
  } else {
    throw std::invalid_argument("unknown adaptation method: " + method);
  }
  write_canonical(out_path, augmented);
  std::ofstream(out_path + ".provenance.json") << sidecar.dump(2) << '\n';
  std::cerr << "wrote " << augmented.size() << " sentences to " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aspect extraction and joint aspect+sentiment tagging"};
  app.require_subcommand(1);

  std::string in_path, ann_path, format = "canonical", out_path;
  CLI::App* ingest = app.add_subcommand("ingest", "convert a corpus to the canonical format");
  ingest->add_option("input", in_path, "input file")->required();
  ingest->add_option("ann", ann_path, "brat .ann file");
  ingest->add_option("--format", format, "semeval-xml | brat | canonical");
  ingest->add_option("--out", out_path, "canonical output path")->required();

  std::string st_path, st_ann, st_format = "canonical";
  bool st_json = false;
  CLI::App* stats = app.add_subcommand("stats", "descriptive corpus statistics");
  stats->add_option("input", st_path, "input file")->required();
  stats->add_option("ann", st_ann, "brat .ann file");
  stats->add_option("--format", st_format, "semeval-xml | brat | canonical");
  stats->add_flag("--json", st_json, "machine-readable output");

  RunOptions topt;
  std::string tconfig;
  CLI::App* train_cmd = app.add_subcommand("train", "train one model");
  add_run_flags(train_cmd, topt, tconfig);

  RunOptions xopt;
  std::string xconfig;
  std::vector<std::string> compare;
  CLI::App* crossval = app.add_subcommand("crossval", "k-fold cross validation");
  add_run_flags(crossval, xopt, xconfig);
  crossval->add_option("--compare", compare,
                       "two crossval run directories; prints a t-test instead")
      ->expected(2);

  std::string eckpt, eval_corpus;
  bool eval_json = false;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score a checkpoint on a corpus");
  eval_cmd->add_option("--checkpoint", eckpt, "model checkpoint")->required();
  eval_cmd->add_option("--corpus", eval_corpus, "canonical corpus")->required();
  eval_cmd->add_flag("--json", eval_json, "machine-readable output");

  std::string pckpt, pred_corpus, pred_out;
  CLI::App* predict = app.add_subcommand("predict", "tag a corpus");
  predict->add_option("--checkpoint", pckpt, "model checkpoint")->required();
  predict->add_option("--corpus", pred_corpus, "canonical corpus")->required();
  predict->add_option("--out", pred_out, "token<TAB>gold<TAB>predicted output");

  std::string method, asrc, atgt, asrc_model, aout;
  double weight = 0.2;
  std::uint64_t aseed = 1;
  CLI::App* adapt = app.add_subcommand("adapt", "WEIGHTED / PRED domain adaptation");
  adapt->add_option("--method", method, "weighted | pred")->required();
  adapt->add_option("--src", asrc, "source canonical corpus");
  adapt->add_option("--tgt", atgt, "target canonical corpus")->required();
  adapt->add_option("-w,--weight", weight, "source embedding scale");
  adapt->add_option("--src-model", asrc_model, "AE checkpoint for pred");
  adapt->add_option("--out", aout, "augmented corpus path")->required();
  adapt->add_option("--seed", aseed, "shuffle seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(in_path, ann_path, format, out_path);
    if (*stats) return cmd_stats(st_path, st_ann, st_format, st_json);
    if (*train_cmd) return cmd_train(resolve_options(train_cmd, topt, tconfig));
    if (*crossval)
      return cmd_crossval(resolve_options(crossval, xopt, xconfig), compare);
    if (*eval_cmd) return cmd_eval(eckpt, eval_corpus, eval_json);
    if (*predict) return cmd_predict(pckpt, pred_corpus, pred_out);
    if (*adapt)
      return cmd_adapt(method, asrc, atgt, weight, asrc_model, aout, aseed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
