// Copyright 2026 The ggmc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "ggmc/checkpoint.hpp"
#include "ggmc/data_io.hpp"
#include "ggmc/gossip.hpp"
#include "ggmc/run_config.hpp"
#include "ggmc/trainer.hpp"

namespace ggmc::cli {

namespace fs = std::filesystem;

namespace {

// Usage errors that surface after CLI11 accepted the flags.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string oneLine(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

struct GenerateArgs {
  Index m = 500;
  Index n = 500;
  Index rank = 5;
  double trainFrac = 0.2;
  double testFrac = 0.02;
  std::uint64_t seed = 42;
  int p = 2;
  int q = 2;
  std::string out;
};

struct TrainArgs {
  std::string train;
  std::string config;
  std::string checkpoint;
  std::string factors;
  std::string metrics;
  std::string test;
  std::string splitOut;
  // Flag overrides keyed by config key.
  std::map<std::string, std::string> overrides;
};

struct EvaluateArgs {
  std::string checkpoint;
  std::string test;
  std::string metrics;
};

// Truth factors as a checkpoint: every block in grid row i carries rows of
// A, every block in grid column j carries rows of B, so assembly returns A
// and B unchanged.
FactorState truthState(const GlobalFactors& truth, int p, int q) {
  FactorState state(makeGrid(truth.u.rows(), truth.w.rows(), p, q), truth.u.cols());
  const GridSpec& g = state.grid();
  for (int i = 1; i <= p; ++i) {
    for (int j = 1; j <= q; ++j) {
      FactorPair& f = state.at({i, j});
      f.u = truth.u.middleRows(g.rowRange(i).begin, g.rowRange(i).size());
      f.w = truth.w.middleRows(g.colRange(j).begin, g.colRange(j).size());
    }
  }
  return state;
}

int cmdGenerate(const GenerateArgs& args, std::ostream& out) {
  if (args.p < 2 || args.q < 2 || args.p > args.m || args.q > args.n) {
    throw UsageError("--p/--q must give a grid of at least 2x2 that fits the matrix");
  }
  Rng rng(args.seed);
  const SyntheticData syn = generateSynthetic(args.m, args.n, args.rank, args.trainFrac, args.testFrac, rng);
  const fs::path dir(args.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  writeTriples(dir / "train.triples", syn.dataset.train, syn.dataset.m, syn.dataset.n);
  writeTriples(dir / "test.triples", syn.dataset.test, syn.dataset.m, syn.dataset.n);
  writeCheckpoint(dir / "truth.ckpt", truthState(syn.truth, args.p, args.q));
  out << "wrote " << syn.dataset.train.size() << " train and " << syn.dataset.test.size() << " test triples to "
      << dir.string() << '\n';
  return kSuccess;
}

Index inferExtent(const std::optional<Index>& declared, std::initializer_list<const std::vector<RatingTriple>*> sets,
                  bool rows) {
  if (declared) return *declared;
  Index extent = 0;
  for (const auto* set : sets) {
    for (const RatingTriple& t : *set) extent = std::max(extent, (rows ? t.row : t.col) + 1);
  }
  return extent;
}

int cmdTrain(const TrainArgs& args, std::ostream& out) {
  RunConfig config;
  if (!args.config.empty()) config = loadRunConfig(args.config);
  for (const auto& [key, value] : args.overrides) {
    try {
      applyConfigValue(config, key, value);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
  try {
    config.train.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }

  const fs::path trainPath(args.train);
  if (!fs::exists(trainPath)) throw IoError("train file '" + trainPath.string() + "' not found");

  Dataset dataset;
  if (const auto format = ratingFormatOf(trainPath)) {
    Rng splitRng(config.train.seed);
    dataset = trainTestSplit(loadMovieLens(trainPath, *format), config.testFraction, splitRng);
    if (!args.splitOut.empty()) saveDataset(args.splitOut, dataset);
  } else {
    TripleFile file = readTriples(trainPath);
    dataset.train = std::move(file.triples);
    dataset.m = file.m.value_or(0);
    dataset.n = file.n.value_or(0);
    if (!file.m || !file.n) {
      dataset.m = inferExtent(file.m, {&dataset.train}, true);
      dataset.n = inferExtent(file.n, {&dataset.train}, false);
    }
  }
  if (!args.test.empty()) {
    TripleFile test = readTriples(fs::path(args.test));
    dataset.test = std::move(test.triples);
    if (test.m && test.n && (*test.m != dataset.m || *test.n != dataset.n)) {
      throw UsageError("test file dimensions differ from the training data");
    }
  }
  for (const RatingTriple& t : dataset.test) {
    if (t.row >= dataset.m || t.col >= dataset.n) throw UsageError("test triple outside the training matrix");
  }

  const GridSpec grid = makeGrid(dataset.m, dataset.n, config.train.p, config.train.q);
  const PartitionedData data(grid, dataset.train);

  std::unique_ptr<std::ofstream> metricsFile;
  std::optional<MetricsWriter> metrics;
  if (!args.metrics.empty()) {
    metricsFile = std::make_unique<std::ofstream>(args.metrics);
    if (!*metricsFile) throw IoError("cannot open metrics file '" + args.metrics + "' for writing");
    metrics.emplace(*metricsFile);
  }
  auto emit = [&](std::size_t iteration, double cost, const FactorState& state, const SimStats* stats) {
    if (!metrics) return;
    MetricsRow row{iteration, cost, std::nullopt, std::nullopt, std::nullopt};
    if (!dataset.test.empty()) row.rmseTest = rmse(dataset.test, assembleGlobalFactors(state));
    if (stats) {
      row.messagesSent = stats->messagesSent;
      row.rounds = stats->rounds;
    }
    metrics->write(row);
  };

  TrainReport report;
  std::optional<SimStats> stats;
  if (config.mode == RunMode::Gossip) {
    GossipReport g = runGossip(data, config.train, GossipSchedule::Batched,
                               [&](std::size_t it, double cost, const FactorState& s, const SimStats& st) {
                                 emit(it, cost, s, &st);
                               });
    report = std::move(g.train);
    stats = g.stats;
  } else {
    report = train(data, config.train,
                   [&](std::size_t it, double cost, const FactorState& s) { emit(it, cost, s, nullptr); });
  }

  writeCheckpoint(fs::path(args.checkpoint), report.finalState);
  const GlobalFactors global = assembleGlobalFactors(report.finalState);
  writeGlobalFactors(args.factors.empty() ? fs::path(args.checkpoint + ".factors") : fs::path(args.factors), global);

  out << std::setprecision(6) << "iterations " << report.iterations << " converged " << std::boolalpha
      << report.converged << " first_cost " << report.costTrace.front().cost << " final_cost "
      << report.costTrace.back().cost;
  if (!dataset.test.empty()) out << " rmse_test " << rmse(dataset.test, global);
  if (stats) out << " messages_sent " << stats->messagesSent << " rounds " << stats->rounds;
  out << '\n';
  return kSuccess;
}

int cmdEvaluate(const EvaluateArgs& args, std::ostream& out) {
  const FactorState state = readCheckpoint(fs::path(args.checkpoint));
  const TripleFile test = readTriples(fs::path(args.test));
  for (const RatingTriple& t : test.triples) {
    if (t.row >= state.grid().m() || t.col >= state.grid().n()) {
      throw IoError("test triple (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                    ") lies outside the checkpoint's " + std::to_string(state.grid().m()) + "x" +
                    std::to_string(state.grid().n()) + " matrix");
    }
  }
  if (test.triples.empty()) throw IoError("test file '" + args.test + "' holds no triples");
  const double value = rmse(test.triples, assembleGlobalFactors(state));
  out << std::setprecision(17) << value << '\n';
  if (!args.metrics.empty()) {
    std::ofstream os(args.metrics);
    if (!os) throw IoError("cannot open metrics file '" + args.metrics + "' for writing");
    os << std::setprecision(17) << "iteration,cost,rmse_test,messages_sent,rounds\n,," << value << ",,\n";
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ggmc: decentralised block-grid matrix completion"};
  app.name("ggmc");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic low-rank completion problem");
  generate->add_option("--m", gen.m, "Row count")->capture_default_str();
  generate->add_option("--n", gen.n, "Column count")->capture_default_str();
  generate->add_option("--rank", gen.rank, "Ground-truth rank")->capture_default_str();
  generate->add_option("--train-frac", gen.trainFrac, "Fraction of cells observed for training")->capture_default_str();
  generate->add_option("--test-frac", gen.testFrac, "Fraction of cells held out for testing")->capture_default_str();
  generate->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
  generate->add_option("--p", gen.p, "Grid rows of truth.ckpt")->capture_default_str();
  generate->add_option("--q", gen.q, "Grid columns of truth.ckpt")->capture_default_str();
  generate->add_option("--out", gen.out, "Output directory")->required();

  TrainArgs tr;
  auto* trainCmd = app.add_subcommand(
      "train", "Train block factors. Precedence: flags > --config file > built-in defaults");
  trainCmd->add_option("--train", tr.train, "Training triples (.triples) or MovieLens ratings (.dat/.csv)")
      ->required();
  trainCmd->add_option("--config", tr.config, "Run config file (key = value lines)");
  trainCmd->add_option("--out-checkpoint", tr.checkpoint, "Per-block checkpoint output")->required();
  trainCmd->add_option("--factors", tr.factors, "Assembled global factors output (default <checkpoint>.factors)");
  trainCmd->add_option("--metrics", tr.metrics, "Metrics CSV output");
  trainCmd->add_option("--test", tr.test, "Held-out triples; fills the rmse_test column");
  trainCmd->add_option("--split-out", tr.splitOut, "Directory for the train/test split of a MovieLens input");
  std::map<std::string, std::string> flagValues;
  for (std::string_view key : runConfigKeys()) {
    std::string flag = "--" + std::string(key);
    std::replace(flag.begin(), flag.end(), '_', '-');
    trainCmd->add_option(flag, flagValues[std::string(key)], "Override config key '" + std::string(key) + "'");
  }

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Print the test RMSE of a checkpoint");
  evaluate->add_option("--checkpoint", ev.checkpoint, "Per-block checkpoint")->required();
  evaluate->add_option("--test", ev.test, "Test triples")->required();
  evaluate->add_option("--metrics", ev.metrics, "Write a one-row metrics CSV");

  std::vector<std::string> argvStore{"ggmc"};
  argvStore.insert(argvStore.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argvStore) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << oneLine(e.what()) << '\n';
    return kUsage;
  }

  try {
    if (generate->parsed()) return cmdGenerate(gen, out);
    if (trainCmd->parsed()) {
      for (const auto& [key, value] : flagValues) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (trainCmd->count(flag) > 0) tr.overrides[key] = value;
      }
      return cmdTrain(tr, out);
    }
    if (evaluate->parsed()) return cmdEvaluate(ev, out);
  } catch (const UsageError& e) {
    err << "error: " << oneLine(e.what()) << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << oneLine(e.what()) << '\n';
    return kUsage;
  } catch (const DivergenceError& e) {
    err << "error: diverged: " << oneLine(e.what()) << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    err << "error: " << oneLine(e.what()) << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace ggmc::cli
