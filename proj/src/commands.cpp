#include "dsetp/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "dsetp/model_io.hpp"
#include "dsetp/stats.hpp"
#include "dsetp/trainer.hpp"
#include "dsetp/transition.hpp"
#include "dsetp/treebank.hpp"

namespace dsetp {

namespace fs = std::filesystem;

namespace {

void require_readable(const fs::path& p, const std::string& what) {
  if (p.empty()) throw CommandError("no " + what + " given");
  std::error_code ec;
  if (fs::is_directory(p, ec)) throw CommandError(what + " " + p.string() + " is a directory");
  std::ifstream in(p);
  if (!in) throw CommandError("cannot read " + what + " " + p.string());
}

// Only checks the directory; the file itself may not exist yet.
void require_writable(const fs::path& p, const std::string& what) {
  if (p.empty() || p == "-") return;
  const auto dir = p.parent_path();
  std::error_code ec;
  if (!dir.empty() && !fs::is_directory(dir, ec))
    throw CommandError("directory for " + what + " " + p.string() + " does not exist");
  if (fs::is_directory(p, ec)) throw CommandError(what + " " + p.string() + " is a directory");
}

std::vector<DiscTree> load_trees(const fs::path& p, const ReadOptions& options = {}) {
  std::ifstream in(p);
  if (!in) throw CommandError("cannot read " + p.string());
  try {
    return read_trees(in, options);
  } catch (const ParseError& e) {
    throw CommandError(p.string() + ": " + e.what());
  }
}

// Writes to the file when one is given, to `fallback` otherwise.
class Sink {
 public:
  Sink(const fs::path& p, std::ostream& fallback) : stream_(&fallback) {
    if (!p.empty() && p != "-") {
      file_.open(p);
      if (!file_) throw CommandError("cannot write " + p.string());
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::vector<std::vector<std::string>> sentences_of(const std::vector<DiscTree>& trees) {
  std::vector<std::vector<std::string>> out;
  out.reserve(trees.size());
  for (const auto& t : trees) out.push_back(t.tokens);
  return out;
}

void save_atomically(const Model<float>& model, const fs::path& p) {
  auto tmp = p;
  tmp += ".tmp";
  save_model(model, tmp);
  fs::rename(tmp, p);
}

}  // namespace

std::string format_report(const EvalReport& r) {
  return "F " + percent(r.f1()) + " P " + percent(r.precision()) + " R " + percent(r.recall()) + " DISC-F " +
         percent(r.disc_f1()) + " DISC-P " + percent(r.disc_precision()) + " DISC-R " + percent(r.disc_recall()) +
         " POS " + percent(r.pos_accuracy());
}

std::vector<DiscTree> parse_all(const Model<float>& model, const std::vector<std::vector<std::string>>& sentences,
                                int jobs) {
  for (std::size_t k = 0; k < sentences.size(); ++k)
    if (sentences[k].empty()) throw std::invalid_argument("sentence " + std::to_string(k + 1) + " is empty");
  std::vector<DiscTree> out(sentences.size());
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), sentences.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < sentences.size(); ++k) out[k] = greedy_parse(sentences[k], model);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (auto k = next++; k < sentences.size(); k = next++) {
          try {
            out[k] = greedy_parse(sentences[k], model);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = sentences.size();
          }
        }
      });
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// -------------------------------------------------------------------- train

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  require_readable(o.train_path, "training treebank");
  require_readable(o.dev_path, "development treebank");
  if (o.model_out.empty()) throw CommandError("no model output path given");
  require_writable(o.model_out, "model");
  require_writable(o.log_path, "log");
  if (o.eval_every < 1) throw CommandError("--eval-every must be at least 1");
  o.model.validate();

  const ReadOptions read{o.filter.unary_sep};
  auto corpus = build_vocabularies(load_trees(o.train_path, read));
  const auto dev = load_trees(o.dev_path, read);
  const auto dev_sentences = sentences_of(dev);
  const double p = o.oracle == OracleMode::kDynamic ? o.model.explore_prob : 0.0;
  err << "training on " << corpus.trees.size() << " trees, " << dev.size() << " development trees, ";
  if (o.oracle == OracleMode::kDynamic)
    err << "dynamic oracle, exploration p=" << p << '\n';
  else
    err << "static oracle\n";

  Model<float> model(o.model, corpus.inventories);
  Trainer trainer(model, corpus.trees, p);

  Sink log(o.log_path, out);
  *log << "epoch\ttag_loss\tparse_loss\tdev_f\tdev_disc_f\tdev_pos\n" << std::flush;
  double best = -1.0;
  int best_epoch = 0;
  for (int e = 1; e <= o.model.epochs; ++e) {
    const auto stats = trainer.run_epoch();
    if (e % o.eval_every != 0 && e != o.model.epochs) continue;
    const auto report = labelled_fscore(parse_all(model, dev_sentences, o.jobs), dev, o.filter);
    *log << e << '\t' << stats.tag_loss << '\t' << stats.parse_loss << '\t' << percent(report.f1()) << '\t'
         << percent(report.disc_f1()) << '\t' << percent(report.pos_accuracy()) << '\n'
         << std::flush;
    err << "epoch " << e << ": " << format_report(report);
    if (report.f1() > best) {
      best = report.f1();
      best_epoch = e;
      save_atomically(model, o.model_out);
      err << " (saved)";
    }
    err << '\n';
  }
  if (best_epoch == 0) {
    save_atomically(model, o.model_out);
    err << "no evaluation ran; saved the final model\n";
  } else {
    err << "best development F " << percent(best) << " at epoch " << best_epoch << '\n';
  }
  return 0;
}

// -------------------------------------------------------------------- parse

int cmd_parse(const ParseOptions& o, std::ostream& out, std::ostream& err) {
  require_readable(o.model_path, "model");
  require_readable(o.input_path, "input");
  require_writable(o.out_path, "output");
  auto model = load_model(o.model_path);

  std::ifstream in(o.input_path);
  std::vector<std::vector<std::string>> sentences;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream words(line);
    std::vector<std::string> tokens;
    for (std::string w; words >> w;) tokens.push_back(w);
    if (tokens.empty()) throw CommandError(o.input_path.string() + ": line " + std::to_string(number) + " is empty");
    sentences.push_back(std::move(tokens));
  }
  const auto trees = parse_all(model, sentences, o.jobs);
  Sink sink(o.out_path, out);
  for (const auto& t : trees) *sink << write_discbracket(t) << '\n';
  err << "parsed " << trees.size() << " sentences\n";
  return 0;
}

// --------------------------------------------------------------------- eval

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  require_readable(o.pred_path, "predictions");
  require_readable(o.gold_path, "gold treebank");
  const ReadOptions read{o.filter.unary_sep};
  const auto pred = load_trees(o.pred_path, read);
  const auto gold = load_trees(o.gold_path, read);
  if (pred.size() != gold.size())
    throw CommandError("predictions have " + std::to_string(pred.size()) + " trees but gold has " +
                       std::to_string(gold.size()));
  EvalReport total;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    try {
      total += labelled_fscore(pred[k], gold[k], o.filter);
    } catch (const std::invalid_argument& e) {
      throw CommandError("sentence " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  out << format_report(total) << '\n';
  err << "evaluated " << pred.size() << " sentences\n";
  return 0;
}

// ------------------------------------------------------------- oracle-check

int cmd_oracle_check(const OracleCheckCliOptions& o, std::ostream& out, std::ostream& err,
                     const OracleSuite& oracles) {
  require_readable(o.treebank_path, "treebank");
  require_writable(o.dump_path, "derivation dump");
  const auto trees = load_trees(o.treebank_path);
  std::optional<Sink> dump;
  if (!o.dump_path.empty()) dump.emplace(o.dump_path, out);

  std::mt19937_64 rng(o.seed);
  std::size_t failed = 0, configurations = 0, exhaustive = 0;
  for (std::size_t k = 0; k < trees.size(); ++k) {
    const auto r = check_tree(trees[k], o.check, rng, oracles);
    configurations += r.configurations;
    if (trees[k].size() <= o.check.exhaustive_max) ++exhaustive;
    if (dump) *(*dump) << format_derivation(r.derivation) << '\n';
    if (!r.ok()) {
      ++failed;
      for (const auto& f : r.failures) err << "tree " << k + 1 << ": " << f << '\n';
    }
  }
  err << "oracle-check: " << trees.size() << " trees (" << exhaustive << " exhaustively, " << configurations
      << " configurations), " << failed << " failed: " << (failed ? "FAIL" : "PASS") << '\n';
  return failed ? 1 : 0;
}

// -------------------------------------------------------------------- stats

int cmd_stats(const StatsOptions& o, std::ostream& out, std::ostream& err) {
  require_readable(o.treebank_path, "treebank");
  const auto trees = load_trees(o.treebank_path);
  const auto stats = derivation_stats(trees);
  print_stats(out, stats);
  err << stats.trees << " trees, " << stats.configurations() << " configurations, largest memory "
      << stats.max_memory() << '\n';
  return 0;
}

// ---------------------------------------------------------------------- gen

int cmd_gen(const GenOptions& o, std::ostream& out, std::ostream&) {
  require_writable(o.out_path, "output");
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw CommandError(std::string(name) + " must be in [0,1]");
  };
  unit(o.random.gap_rate, "--gap-rate");
  unit(o.random.unary_rate, "--unary-rate");
  unit(o.toy_options.attachment_noise, "--attachment-noise");
  if (o.random.min_n < 1 || o.random.max_n < o.random.min_n) throw CommandError("need 1 <= --min-n <= --max-n");
  const auto trees = o.toy ? toy_trees(o.count, o.seed, o.toy_options) : random_trees(o.count, o.seed, o.random);
  Sink sink(o.out_path, out);
  for (const auto& t : trees) *sink << write_discbracket(t) << '\n';
  return 0;
}

// ---------------------------------------------------------------------- cli

namespace {

std::string dashed(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

void add_filter(CLI::App* sub, EvalFilter& filter) {
  sub->add_option("--ignore-label", filter.root_labels, "Label left out of evaluation (repeatable)");
  sub->add_option("--punct-tag", filter.punct_tags, "POS tag whose tokens are removed before evaluation (repeatable)");
  sub->add_option("--unary-sep", filter.unary_sep, "Separator of collapsed unary labels")->capture_default_str();
}

// CLI11 only reads config files for the top-level command, so subcommands
// apply theirs after parsing: keys name long options, flat or under a
// [subcommand] section, and anything given on the command line wins.
void add_config(CLI::App* sub, std::map<CLI::App*, std::string>& configs) {
  sub->add_option("--config", configs[sub], "File of key = value settings; command-line flags take precedence");
}

void apply_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CommandError("cannot read config " + path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw CommandError(path + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && item.parents != std::vector<std::string>{sub->get_name()})
      throw CommandError(path + ": section [" + item.parents.front() + "] does not belong to " + sub->get_name());
    auto* opt = sub->get_option_no_throw("--" + item.name);
    if (!opt || item.name == "config") throw CommandError(path + ": unknown setting '" + item.name + "'");
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

void apply_seed_fallback(CLI::App* sub) {
  auto* opt = sub->get_option_no_throw("--seed");
  if (!opt || opt->count() > 0) return;
  if (const char* env = std::getenv("DSETP_SEED"); env && *env) {
    opt->add_result(env);
    opt->run_callback();
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discontinuous constituency parser with a set-based transition system"};
  app.name("dsetp");
  app.require_subcommand(1);
  std::map<CLI::App*, std::string> configs;

  // train
  TrainOptions train;
  std::string preset = "full";
  std::uint64_t train_seed = 0;
  std::map<std::string, std::string> overrides;
  auto* t = app.add_subcommand("train", "Train a model, keeping the checkpoint with the best development F");
  add_config(t, configs);
  t->add_option("train", train.train_path, "Training treebank (discbracket)")->required();
  t->add_option("dev", train.dev_path, "Development treebank (discbracket)")->required();
  t->add_option("-o,--model", train.model_out, "Model file to write")->required();
  t->add_option("--log", train.log_path, "TSV metrics log (default: standard output)");
  t->add_option("--preset", preset, "Base settings: full or desk")
      ->check(CLI::IsMember({"full", "desk"}))
      ->capture_default_str();
  t->add_option("--oracle", train.oracle, "static or dynamic")
      ->transform(CLI::CheckedTransformer(std::map<std::string, OracleMode>{{"static", OracleMode::kStatic},
                                                                          {"dynamic", OracleMode::kDynamic}},
                                          CLI::ignore_case))
      ->default_str("static");
  t->add_option("--eval-every", train.eval_every, "Evaluate on the development set every k epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  t->add_option("--jobs", train.jobs, "Threads for development parsing")->check(CLI::PositiveNumber);
  auto* seed_opt = t->add_option("--seed", train_seed, "Random seed (default: $DSETP_SEED, then 1)");
  add_filter(t, train.filter);
  for (const auto& [key, value] : ModelConfig{}.fields()) {
    if (key == "seed") continue;
    std::string names = key == "explore_prob" ? "--explore-p,--explore_prob" : "--" + dashed(key);
    if (key != "explore_prob" && dashed(key) != key) names += ",--" + key;
    t->add_option(names, overrides[key], "Model setting " + key + " (full preset: " + value + ")");
  }

  // parse
  ParseOptions parse;
  auto* p = app.add_subcommand("parse", "Parse tokenised sentences, one per line");
  add_config(p, configs);
  p->add_option("model", parse.model_path, "Model file")->required();
  p->add_option("input", parse.input_path, "Sentences, space separated tokens")->required();
  p->add_option("-o,--output", parse.out_path, "Output treebank (default: standard output)");
  p->add_option("--jobs", parse.jobs, "Parsing threads")->check(CLI::PositiveNumber)->capture_default_str();

  // eval
  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "Labelled bracket scores of predictions against gold trees");
  add_config(e, configs);
  e->add_option("pred", eval.pred_path, "Predicted treebank")->required();
  e->add_option("gold", eval.gold_path, "Gold treebank")->required();
  add_filter(e, eval.filter);

  // oracle-check
  OracleCheckCliOptions check;
  auto* c = app.add_subcommand("oracle-check", "Verify the oracles on every tree of a treebank");
  add_config(c, configs);
  c->add_option("treebank", check.treebank_path, "Treebank (discbracket)")->required();
  c->add_option("--exhaustive-max", check.check.exhaustive_max, "Longest sentence checked exhaustively")
      ->check(CLI::Range(0, 10))
      ->capture_default_str();
  c->add_option("--perturb", check.check.perturb, "Random wrong-prefix walks per tree")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  c->add_option("--error-rate", check.check.error_rate, "Chance of a random action in a walk")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  c->add_option("--dump", check.dump_path, "Write canonical derivations here (- for standard output)");
  c->add_option("--seed", check.seed, "Random seed (default: $DSETP_SEED, then 1)")->capture_default_str();

  // stats
  StatsOptions stats;
  auto* s = app.add_subcommand("stats", "Memory size, derivation length and gap degree statistics");
  add_config(s, configs);
  s->add_option("treebank", stats.treebank_path, "Treebank (discbracket)")->required();

  // gen
  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate random valid trees");
  add_config(g, configs);
  g->add_option("--count", gen.count, "Number of trees")->capture_default_str();
  g->add_option("--min-n", gen.random.min_n, "Shortest sentence")->capture_default_str();
  g->add_option("--max-n", gen.random.max_n, "Longest sentence")->capture_default_str();
  g->add_option("--gap-rate", gen.random.gap_rate, "Chance that a merge may create a gap")->capture_default_str();
  g->add_option("--unary-rate", gen.random.unary_rate, "Chance of unary chains")->capture_default_str();
  g->add_flag("--toy", gen.toy, "Sentences from a small learnable grammar instead");
  g->add_option("--attachment-noise", gen.toy_options.attachment_noise, "Toy grammar: PP attachment noise")
      ->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed (default: $DSETP_SEED, then 1)")->capture_default_str();
  g->add_option("-o,--output", gen.out_path, "Output file (default: standard output)");

  try {
    app.parse(argc, argv);
    auto* sub = app.get_subcommands().front();
    if (const auto& path = configs[sub]; !path.empty()) apply_config(sub, path);
    apply_seed_fallback(sub);
  } catch (const CommandError& ex) {
    err << "dsetp: error: " << ex.what() << '\n';
    return 1;
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*t) {
      train.model = preset == "desk" ? ModelConfig::desk() : ModelConfig{};
      for (const auto& [key, value] : overrides)
        if (!value.empty()) train.model.set(key, value);
      if (*seed_opt) train.model.seed = train_seed;
      return cmd_train(train, out, err);
    }
    if (*p) return cmd_parse(parse, out, err);
    if (*e) return cmd_eval(eval, out, err);
    if (*c) return cmd_oracle_check(check, out, err);
    if (*s) return cmd_stats(stats, out, err);
    if (*g) return cmd_gen(gen, out, err);
  } catch (const std::exception& ex) {
    err << "dsetp: error: " << ex.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace dsetp
