#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "blindcount/common.hpp"

namespace blindcount {

// One evaluated (image, class) pair. NAE/SRE divide by y, so y must be
// positive: every labeled class has at least one instance.
struct CountPair {
  double y = 0.0;      // ground truth count
  double y_hat = 0.0;  // predicted count
  std::string image_id;
  int class_index = 0;
};

struct MetricReport {
  double mae = 0.0;
  double rmse = 0.0;
  double nae = 0.0;
  double sre = 0.0;
  size_t pair_count = 0;
};

// Means are taken over all (image, class) pairs: the per-image class counts
// vary, and weighting every counted class equally reduces to the flat
// normalization when they do not.
inline MetricReport compute_metrics(const std::vector<CountPair>& pairs) {
  require(!pairs.empty(), "compute_metrics: empty pair list");
  double abs_sum = 0.0, sq_sum = 0.0, nabs_sum = 0.0, nsq_sum = 0.0;
  for (const auto& p : pairs) {
    require(p.y > 0.0, "compute_metrics: ground truth counts must be positive");
    const double e = p.y - p.y_hat;
    abs_sum += std::abs(e);
    sq_sum += e * e;
    nabs_sum += std::abs(e) / p.y;
    nsq_sum += e * e / p.y;
  }
  const double n = static_cast<double>(pairs.size());
  MetricReport r;
  r.mae = abs_sum / n;
  r.rmse = std::sqrt(sq_sum / n);
  r.nae = nabs_sum / n;
  r.sre = std::sqrt(nsq_sum / n);
  r.pair_count = pairs.size();
  return r;
}

enum class BaselineMode { kMean, kMedian };

// Constant predictor fitted on training-set counts.
inline double baseline_predict(const std::vector<double>& train_counts, BaselineMode mode) {
  require(!train_counts.empty(), "baseline_predict: empty training counts");
  if (mode == BaselineMode::kMean) {
    double sum = 0.0;
    for (double c : train_counts) sum += c;
    return sum / static_cast<double>(train_counts.size());
  }
  std::vector<double> sorted = train_counts;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

inline nlohmann::json report_to_json(const MetricReport& r) {
  return nlohmann::json{
      {"mae", r.mae}, {"rmse", r.rmse}, {"nae", r.nae}, {"sre", r.sre}, {"pairs", r.pair_count}};
}

inline MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport r;
  r.mae = j.at("mae").get<double>();
  r.rmse = j.at("rmse").get<double>();
  r.nae = j.at("nae").get<double>();
  r.sre = j.at("sre").get<double>();
  r.pair_count = j.at("pairs").get<size_t>();
  return r;
}

inline std::string report_csv_header() { return "label,mae,rmse,nae,sre,pairs"; }

inline std::string report_csv_row(const std::string& label, const MetricReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%zu", label.c_str(), r.mae, r.rmse,
                r.nae, r.sre, r.pair_count);
  return std::string(buf);
}

}  // namespace blindcount
