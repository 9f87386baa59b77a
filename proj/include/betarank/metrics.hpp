#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "betarank/baselines.hpp"
#include "betarank/corpus.hpp"
#include "betarank/types.hpp"

namespace betarank {

/// One test query: a 3-item seed and the observed next item, taken from a
/// length-4 sliding window of a test session.
struct EvalInstance {
  std::array<ItemId, 3> seed;
  ItemId truth;
};

std::vector<EvalInstance> make_instances(const Corpus& test);

struct EvalRow {
  std::string predictor;
  double accuracy;   // rank-1 exact matches
  double mrr;        // reciprocal rank, 0 beyond the cutoff
  double recall;     // hit anywhere within the cutoff
  std::size_t instances;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::size_t cutoff;
};

/// Evaluates one predictor over the instances at the given cutoff. The
/// ground truth is a single item, so recall@cutoff reduces to hit-rate.
/// Throws std::invalid_argument on an empty instance list; a predictor
/// failure is rethrown naming the instance index.
EvalRow evaluate(const Predictor& predictor, std::span<const EvalInstance> instances,
                 std::size_t cutoff = 20);

/// Runs every predictor on the identical instance set.
EvalReport compare(std::span<const Predictor* const> predictors,
                   std::span<const EvalInstance> instances, std::size_t cutoff = 20);

/// Columns: predictor, accuracy, mrr20, recall20, n (cutoff substituted).
void write_report_tsv(const EvalReport& report, const std::filesystem::path& path);

/// Aligned text table for standard output.
std::string format_report_table(const EvalReport& report);

}  // namespace betarank
