#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Classification metrics and feature-space aggregation metrics.
namespace kgamc::eval {

struct SnrAccuracy {
  double overall = 0;
  std::map<int, double> per_snr;
  std::map<int, std::size_t> count;    // frames per SNR
  std::map<int, std::size_t> correct;  // correct predictions per SNR
  std::size_t total = 0;
  std::size_t total_correct = 0;
};

// Throws ConfigError on empty input or unequal lengths.
SnrAccuracy accuracy_by_snr(std::span<const int> preds, std::span<const int> labels,
                            std::span<const int> snrs);

// counts[i][j] = #{true i, predicted j}. Throws ConfigError on out-of-range labels.
using Confusion = std::vector<std::vector<std::size_t>>;
Confusion confusion_matrix(std::span<const int> preds, std::span<const int> labels,
                           std::size_t num_classes);

struct ClusterMetrics {
  double intra_cos = 0;    // mean cosine over same-class pairs
  double inter_cos = 0;    // mean cosine over different-class pairs
  double silhouette = 0;   // mean silhouette under cosine distance 1 - cos
};

// features is N x dim, row-major. Needs at least two classes with two samples each.
ClusterMetrics cluster_metrics(std::span<const float> features, std::size_t dim,
                               std::span<const int> labels);

struct EvalReport {
  std::vector<std::string> class_names;
  std::string mode;
  SnrAccuracy accuracy;
  std::map<std::string, Confusion> confusion;  // keyed "0dB", "pooled", ...
  std::optional<ClusterMetrics> cluster;       // on frames with SNR >= cluster_min_snr
  int cluster_min_snr = 0;
};

std::string confusion_key(int snr_db);

// Builds the full report. Confusion matrices at each of confusion_snrs that is
// present plus pooled; cluster metrics on frames with SNR >= cluster_min_snr when
// that subset is non-degenerate.
EvalReport evaluate(std::span<const int> preds, std::span<const int> labels,
                    std::span<const int> snrs, std::span<const float> features, std::size_t dim,
                    std::vector<std::string> class_names, std::string mode,
                    const std::vector<int>& confusion_snrs = {0},
                    int cluster_min_snr = 0);

// Writes accuracy_by_snr.csv, confusion_<key>.csv, cluster_metrics.json and
// features.csv (label, snr, feature values). Throws ConfigError on an empty report.
void export_report(const EvalReport& report, std::span<const float> features, std::size_t dim,
                   std::span<const int> labels, std::span<const int> snrs,
                   const std::filesystem::path& out_dir);

}  // namespace kgamc::eval
