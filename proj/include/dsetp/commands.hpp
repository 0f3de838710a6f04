#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dsetp/eval.hpp"
#include "dsetp/generator.hpp"
#include "dsetp/model.hpp"
#include "dsetp/verification.hpp"

namespace dsetp {

// Any failure a subcommand reports with exit status 1.
class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OracleMode { kStatic, kDynamic };

struct TrainOptions {
  std::filesystem::path train_path;
  std::filesystem::path dev_path;
  std::filesystem::path model_out;
  // Empty: the log goes to standard output.
  std::filesystem::path log_path;
  ModelConfig model;
  OracleMode oracle = OracleMode::kStatic;
  int eval_every = 4;
  int jobs = 1;
  EvalFilter filter;
};

struct ParseOptions {
  std::filesystem::path model_path;
  std::filesystem::path input_path;
  std::filesystem::path out_path;  // empty: standard output
  int jobs = 1;
};

struct EvalOptions {
  std::filesystem::path pred_path;
  std::filesystem::path gold_path;
  EvalFilter filter;
};

struct OracleCheckCliOptions {
  std::filesystem::path treebank_path;
  OracleCheckOptions check;
  std::uint64_t seed = 1;
  // Canonical derivations, one line per tree; "-" is standard output.
  std::filesystem::path dump_path;
};

struct StatsOptions {
  std::filesystem::path treebank_path;
};

struct GenOptions {
  std::size_t count = 100;
  std::uint64_t seed = 1;
  bool toy = false;
  GeneratorOptions random;
  ToyOptions toy_options;
  std::filesystem::path out_path;  // empty: standard output
};

// Subcommands. Machine-readable output goes to `out`, human summaries to
// `err`. They return the exit status and throw CommandError (or the library's
// exceptions) on bad input.
int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err);
int cmd_parse(const ParseOptions& options, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err);
int cmd_oracle_check(const OracleCheckCliOptions& options, std::ostream& out, std::ostream& err,
                     const OracleSuite& oracles = {});
int cmd_stats(const StatsOptions& options, std::ostream& out, std::ostream& err);
int cmd_gen(const GenOptions& options, std::ostream& out, std::ostream& err);

// "F <v> P <v> R <v> DISC-F <v> DISC-P <v> DISC-R <v> POS <v>", percentages
// with two decimals.
std::string format_report(const EvalReport& report);

// Parses sentences concurrently; results keep the input order. Throws
// std::invalid_argument naming the 1-based index of an empty sentence.
std::vector<DiscTree> parse_all(const Model<float>& model, const std::vector<std::vector<std::string>>& sentences,
                                int jobs);

// Full command line. Exit status: 0 success, 1 error or failed check,
// 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dsetp
