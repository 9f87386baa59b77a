#include "betarank/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace betarank {

std::vector<EvalInstance> make_instances(const Corpus& test) {
  std::vector<EvalInstance> instances;
  for (const Session& session : test.sessions) {
    if (session.size() < kWindowSize) continue;
    for (std::size_t start = 0; start + kWindowSize <= session.size(); ++start) {
      instances.push_back(
          {{session[start], session[start + 1], session[start + 2]},
           session[start + 3]});
    }
  }
  return instances;
}

EvalRow evaluate(const Predictor& predictor, std::span<const EvalInstance> instances,
                 std::size_t cutoff) {
  if (instances.empty()) throw std::invalid_argument("evaluate: no instances");

  double hits_at_1 = 0.0, rr_sum = 0.0, hits_at_cutoff = 0.0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    std::vector<ItemId> ranked;
    try {
      ranked = predictor.predict(instances[i].seed, cutoff);
    } catch (const std::exception& e) {
      throw std::runtime_error("predictor '" + std::string(predictor.name()) +
                               "' failed on instance " + std::to_string(i) + ": " +
                               e.what());
    }
    const auto it = std::find(ranked.begin(), ranked.end(), instances[i].truth);
    if (it != ranked.end()) {
      const auto rank = static_cast<std::size_t>(it - ranked.begin()) + 1;
      if (rank <= cutoff) {
        if (rank == 1) hits_at_1 += 1.0;
        rr_sum += 1.0 / static_cast<double>(rank);
        hits_at_cutoff += 1.0;
      }
    }
  }
  const auto n = static_cast<double>(instances.size());
  return {std::string(predictor.name()), hits_at_1 / n, rr_sum / n,
          hits_at_cutoff / n, instances.size()};
}

EvalReport compare(std::span<const Predictor* const> predictors,
                   std::span<const EvalInstance> instances, std::size_t cutoff) {
  if (predictors.empty()) throw std::invalid_argument("compare: no predictors");
  EvalReport report;
  report.cutoff = cutoff;
  for (const Predictor* p : predictors) {
    report.rows.push_back(evaluate(*p, instances, cutoff));
  }
  return report;
}

void write_report_tsv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path.string());
  char buf[64];
  out << "predictor\taccuracy\tmrr" << report.cutoff << "\trecall" << report.cutoff
      << "\tn\n";
  for (const EvalRow& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%.6f\t%.6f\t%.6f", row.accuracy, row.mrr,
                  row.recall);
    out << row.predictor << '\t' << buf << '\t' << row.instances << '\n';
  }
  if (!out) throw std::runtime_error("I/O error writing " + path.string());
}

std::string format_report_table(const EvalReport& report) {
  std::size_t name_width = 9;  // "predictor"
  for (const EvalRow& row : report.rows) {
    name_width = std::max(name_width, row.predictor.size());
  }
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-*s  %9s  %9s  %9s  %8s\n",
                static_cast<int>(name_width), "predictor", "accuracy",
                ("mrr" + std::to_string(report.cutoff)).c_str(),
                ("recall" + std::to_string(report.cutoff)).c_str(), "n");
  out << buf;
  for (const EvalRow& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %9.6f  %9.6f  %9.6f  %8zu\n",
                  static_cast<int>(name_width), row.predictor.c_str(), row.accuracy,
                  row.mrr, row.recall, row.instances);
    out << buf;
  }
  return out.str();
}

}  // namespace betarank
