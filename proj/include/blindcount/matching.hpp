#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "blindcount/common.hpp"
#include "blindcount/densitymap.hpp"
#include "blindcount/lap.hpp"

namespace blindcount {

// The raw output of all prediction heads for one image. counts[i] is always
// the integral of maps[i].
struct PredictionSet {
  std::vector<DensityMap> maps;
  std::vector<double> counts;

  static PredictionSet from_maps(std::vector<DensityMap> maps_in) {
    PredictionSet ps;
    ps.maps = std::move(maps_in);
    ps.counts.reserve(ps.maps.size());
    for (const auto& m : ps.maps) ps.counts.push_back(integrate(m));
    return ps;
  }

  size_t size() const { return maps.size(); }
};

struct MatchedLoss {
  Assignment assignment;
  double loss = 0.0;
  std::vector<double> per_pair_losses;  // label order
};

// Cost of pairing prediction i with label j: the locality cost between the
// L2-normalized maps. rows = predictions, cols = labels.
inline CostMatrix build_cost_matrix(const std::vector<DensityMap>& gts,
                                    const PredictionSet& preds) {
  require(!gts.empty(), "build_cost_matrix: no ground-truth maps");
  require(gts.size() <= preds.size(),
          "build_cost_matrix: more labels than predictions");
  const int mhat = static_cast<int>(preds.size());
  const int m = static_cast<int>(gts.size());
  CostMatrix c(mhat, m);
  for (int i = 0; i < mhat; ++i)
    for (int j = 0; j < m; ++j) c.at(i, j) = normalized_cost(gts[j], preds.maps[i]);
  return c;
}

// Matched training loss: the matching minimizes the normalized-map cost, the
// loss is the plain L1 distance summed over the chosen pairs. Unmatched
// heads contribute nothing.
inline MatchedLoss matched_loss_with_assignment(const std::vector<DensityMap>& gts,
                                                const PredictionSet& preds,
                                                const Assignment& assignment) {
  MatchedLoss out;
  out.assignment = assignment;
  out.per_pair_losses.assign(gts.size(), 0.0);
  for (const auto& [i, j] : assignment.pairs) {
    const double d = l1_distance(gts[static_cast<size_t>(j)], preds.maps[static_cast<size_t>(i)]);
    out.per_pair_losses[static_cast<size_t>(j)] = d;
    out.loss += d;
  }
  return out;
}

inline MatchedLoss matched_loss(const std::vector<DensityMap>& gts, const PredictionSet& preds) {
  const Assignment a = solve_lap(build_cost_matrix(gts, preds));
  return matched_loss_with_assignment(gts, preds, a);
}

// Inference-time evaluation pairs: (ground-truth count, count of the matched
// prediction) per label, in label order.
inline std::vector<std::pair<double, double>> evaluate_matched(const std::vector<DensityMap>& gts,
                                                               const PredictionSet& preds) {
  const Assignment a = solve_lap(build_cost_matrix(gts, preds));
  std::vector<std::pair<double, double>> out(gts.size());
  for (const auto& [i, j] : a.pairs)
    out[static_cast<size_t>(j)] = {integrate(gts[static_cast<size_t>(j)]),
                                   preds.counts[static_cast<size_t>(i)]};
  return out;
}

// Deployment path: no labels exist, so similar predictions are merged
// (element-wise average against the running merged map, greedy in descending
// count order), near-zero predictions are dropped, and the survivors are
// returned in descending count order.
inline PredictionSet deployment_postprocess(const PredictionSet& preds,
                                            double similarity_threshold = 0.15,
                                            double zero_threshold = 0.5) {
  require(similarity_threshold >= 0.0 && zero_threshold >= 0.0,
          "deployment_postprocess: thresholds must be >= 0");
  struct Group {
    DensityMap sum;
    int members = 0;
    DensityMap average() const {
      DensityMap avg = sum;
      const double inv = 1.0 / members;
      for (double& v : avg.values) v *= inv;
      return avg;
    }
  };

  std::vector<size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return preds.counts[a] > preds.counts[b]; });

  std::vector<Group> groups;
  for (size_t idx : order) {
    const DensityMap& map = preds.maps[idx];
    bool merged = false;
    for (auto& g : groups) {
      if (normalized_cost(g.average(), map) < similarity_threshold) {
        for (size_t i = 0; i < g.sum.values.size(); ++i) g.sum.values[i] += map.values[i];
        g.members += 1;
        merged = true;
        break;
      }
    }
    if (!merged) groups.push_back(Group{map, 1});
  }

  std::vector<DensityMap> kept;
  for (const auto& g : groups) {
    DensityMap avg = g.average();
    if (integrate(avg) >= zero_threshold) kept.push_back(std::move(avg));
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const DensityMap& a, const DensityMap& b) { return integrate(a) > integrate(b); });
  return PredictionSet::from_maps(std::move(kept));
}

// Fraction of heads matched more often than `frequency_threshold` of all
// label matches in the log.
inline double head_utilization(const std::vector<Assignment>& match_log, int mhat,
                               double frequency_threshold = 0.004) {
  require(!match_log.empty(), "head_utilization: empty match log");
  require(mhat >= 1, "head_utilization: mhat must be >= 1");
  std::vector<int64_t> matches(static_cast<size_t>(mhat), 0);
  int64_t total = 0;
  for (const auto& a : match_log) {
    for (const auto& [i, j] : a.pairs) {
      require(i >= 0 && i < mhat, "head_utilization: head index out of range");
      matches[static_cast<size_t>(i)] += 1;
      total += 1;
    }
  }
  require(total > 0, "head_utilization: log contains no matches");
  int frequent = 0;
  for (int64_t c : matches) {
    if (static_cast<double>(c) / static_cast<double>(total) > frequency_threshold) ++frequent;
  }
  return static_cast<double>(frequent) / static_cast<double>(mhat);
}

// Match logs serialize one JSON object per line:
// {"image_id": ..., "pairs": [[head, class], ...], "total_cost": ...}
struct MatchLogEntry {
  std::string image_id;
  Assignment assignment;
};

inline void append_match_log(std::ostream& out, const MatchLogEntry& entry) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [i, j] : entry.assignment.pairs) pairs.push_back({i, j});
  nlohmann::json line{{"image_id", entry.image_id},
                      {"pairs", pairs},
                      {"total_cost", entry.assignment.total_cost}};
  out << line.dump() << "\n";
}

inline std::vector<MatchLogEntry> read_match_log(const std::filesystem::path& path) {
  std::ifstream f(path);
  require(f.good(), "read_match_log: cannot open " + path.string());
  std::vector<MatchLogEntry> entries;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    MatchLogEntry e;
    e.image_id = j.at("image_id").get<std::string>();
    for (const auto& p : j.at("pairs"))
      e.assignment.pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    e.assignment.total_cost = j.at("total_cost").get<double>();
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace blindcount
