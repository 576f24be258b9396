#include "kgamc/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kgamc/dataset.hpp"
#include "kgamc/error.hpp"
#include "kgamc/nn/ops.hpp"

namespace kgamc::eval {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::size_t kBlockRows = 512;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

std::string snr_label(int snr) {
  return snr == kNoiselessSnr ? std::string("noiseless") : std::to_string(snr);
}

}  // namespace

SnrAccuracy accuracy_by_snr(std::span<const int> preds, std::span<const int> labels,
                            std::span<const int> snrs) {
  if (preds.empty()) throw ConfigError("accuracy_by_snr: no predictions");
  if (preds.size() != labels.size() || preds.size() != snrs.size()) {
    throw ConfigError("accuracy_by_snr: predictions, labels and SNRs differ in length");
  }
  SnrAccuracy out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool hit = preds[i] == labels[i];
    ++out.count[snrs[i]];
    out.correct[snrs[i]] += hit;
    out.total_correct += hit;
  }
  out.total = preds.size();
  for (const auto& [snr, n] : out.count) {
    out.per_snr[snr] = static_cast<double>(out.correct[snr]) / static_cast<double>(n);
  }
  out.overall = static_cast<double>(out.total_correct) / static_cast<double>(out.total);
  return out;
}

Confusion confusion_matrix(std::span<const int> preds, std::span<const int> labels,
                           std::size_t num_classes) {
  if (preds.size() != labels.size()) {
    throw ConfigError("confusion_matrix: predictions and labels differ in length");
  }
  Confusion counts(num_classes, std::vector<std::size_t>(num_classes, 0));
  const int m = static_cast<int>(num_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= m || preds[i] < 0 || preds[i] >= m) {
      throw ConfigError("confusion_matrix: label or prediction outside [0, " +
                        std::to_string(num_classes) + ") at index " + std::to_string(i));
    }
    ++counts[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(preds[i])];
  }
  return counts;
}

ClusterMetrics cluster_metrics(std::span<const float> features, std::size_t dim,
                               std::span<const int> labels) {
  const std::size_t n = labels.size();
  if (dim == 0 || features.size() != n * dim) {
    throw ShapeError("cluster_metrics: " + std::to_string(features.size()) +
                     " feature values for " + std::to_string(n) + " labels of width " +
                     std::to_string(dim));
  }
  std::map<int, std::size_t> class_index;
  for (int y : labels) class_index.emplace(y, 0);
  if (class_index.size() < 2) throw ConfigError("cluster_metrics needs at least two classes");
  std::size_t next = 0;
  for (auto& [y, k] : class_index) k = next++;
  const std::size_t c = class_index.size();
  std::vector<std::size_t> cls(n), size(c, 0);
  for (std::size_t i = 0; i < n; ++i) ++size[cls[i] = class_index[labels[i]]];
  for (std::size_t k = 0; k < c; ++k) {
    if (size[k] < 2) throw ConfigError("cluster_metrics needs at least two samples per class");
  }

  RowMatrix u(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0;
    for (std::size_t k = 0; k < dim; ++k) {
      u(i, k) = features[i * dim + k];
      norm += u(i, k) * u(i, k);
    }
    norm = std::sqrt(norm);
    u.row(i) = norm > nn::kNormEpsilon ? RowMatrix(u.row(i) / norm) : RowMatrix::Zero(1, dim);
  }

  double intra_sum = 0, inter_sum = 0, silhouette_sum = 0;
  std::vector<double> class_sum(c);
  for (std::size_t start = 0; start < n; start += kBlockRows) {
    const std::size_t rows = std::min(kBlockRows, n - start);
    const RowMatrix g = u.middleRows(start, rows) * u.transpose();
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t i = start + r;
      std::fill(class_sum.begin(), class_sum.end(), 0.0);
      for (std::size_t j = 0; j < n; ++j) class_sum[cls[j]] += g(r, j);
      const std::size_t own = cls[i];
      const double same = class_sum[own] - g(r, i);
      double other = 0;
      double b = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < c; ++k) {
        if (k == own) continue;
        other += class_sum[k];
        b = std::min(b, 1.0 - class_sum[k] / static_cast<double>(size[k]));
      }
      intra_sum += same;
      inter_sum += other;
      const double a = 1.0 - same / static_cast<double>(size[own] - 1);
      const double denom = std::max(a, b);
      silhouette_sum += denom > 0 ? (b - a) / denom : 0.0;
    }
  }
  double intra_pairs = 0;
  for (std::size_t k = 0; k < c; ++k) {
    intra_pairs += static_cast<double>(size[k]) * static_cast<double>(size[k] - 1);
  }
  const double all_pairs = static_cast<double>(n) * static_cast<double>(n - 1);
  ClusterMetrics out;
  out.intra_cos = intra_sum / intra_pairs;
  out.inter_cos = inter_sum / (all_pairs - intra_pairs);
  out.silhouette = silhouette_sum / static_cast<double>(n);
  return out;
}

std::string confusion_key(int snr_db) {
  return snr_db == kNoiselessSnr ? std::string("noiseless") : std::to_string(snr_db) + "dB";
}

EvalReport evaluate(std::span<const int> preds, std::span<const int> labels,
                    std::span<const int> snrs, std::span<const float> features, std::size_t dim,
                    std::vector<std::string> class_names, std::string mode,
                    const std::vector<int>& confusion_snrs, int cluster_min_snr) {
  EvalReport report;
  report.class_names = std::move(class_names);
  report.mode = std::move(mode);
  report.accuracy = accuracy_by_snr(preds, labels, snrs);
  const std::size_t m = report.class_names.size();
  report.confusion["pooled"] = confusion_matrix(preds, labels, m);
  for (int snr : confusion_snrs) {
    std::vector<int> p, y;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (snrs[i] == snr) {
        p.push_back(preds[i]);
        y.push_back(labels[i]);
      }
    }
    if (!p.empty()) report.confusion[confusion_key(snr)] = confusion_matrix(p, y, m);
  }

  report.cluster_min_snr = cluster_min_snr;
  std::vector<float> sub;
  std::vector<int> sub_labels;
  std::map<int, std::size_t> per_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (snrs[i] < cluster_min_snr) continue;
    sub.insert(sub.end(), features.begin() + static_cast<std::ptrdiff_t>(i * dim),
               features.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
    sub_labels.push_back(labels[i]);
    ++per_class[labels[i]];
  }
  const bool usable = per_class.size() >= 2 &&
                      std::all_of(per_class.begin(), per_class.end(),
                                  [](const auto& kv) { return kv.second >= 2; });
  if (usable) report.cluster = cluster_metrics(sub, dim, sub_labels);
  return report;
}

void export_report(const EvalReport& report, std::span<const float> features, std::size_t dim,
                   std::span<const int> labels, std::span<const int> snrs,
                   const std::filesystem::path& out_dir) {
  if (report.accuracy.total == 0 || report.class_names.empty()) {
    throw ConfigError("refusing to export an empty report");
  }
  if (labels.size() != snrs.size() || features.size() != labels.size() * dim) {
    throw ShapeError("export_report: features, labels and SNRs do not line up");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  {
    auto out = open_out(out_dir / "accuracy_by_snr.csv");
    out << "snr_db,count,correct,accuracy\n";
    for (const auto& [snr, acc] : report.accuracy.per_snr) {
      out << snr_label(snr) << ',' << report.accuracy.count.at(snr) << ','
          << report.accuracy.correct.at(snr) << ',' << acc << '\n';
    }
    out << "all," << report.accuracy.total << ',' << report.accuracy.total_correct << ','
        << report.accuracy.overall << '\n';
  }

  for (const auto& [key, counts] : report.confusion) {
    auto out = open_out(out_dir / ("confusion_" + key + ".csv"));
    out << "true\\predicted";
    for (const auto& name : report.class_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < counts.size(); ++i) {
      out << report.class_names[i];
      for (auto v : counts[i]) out << ',' << v;
      out << '\n';
    }
  }

  {
    nlohmann::ordered_json j;
    j["mode"] = report.mode;
    j["overall_accuracy"] = report.accuracy.overall;
    j["frames"] = report.accuracy.total;
    j["min_snr_db"] = report.cluster_min_snr;
    if (report.cluster) {
      j["intra_class_cos"] = report.cluster->intra_cos;
      j["inter_class_cos"] = report.cluster->inter_cos;
      j["silhouette"] = report.cluster->silhouette;
    } else {
      j["intra_class_cos"] = nullptr;
      j["inter_class_cos"] = nullptr;
      j["silhouette"] = nullptr;
    }
    auto out = open_out(out_dir / "cluster_metrics.json");
    out << j.dump(2) << '\n';
  }

  {
    auto out = open_out(out_dir / "features.csv");
    out << std::setprecision(std::numeric_limits<float>::max_digits10);
    out << "label,snr";
    for (std::size_t k = 0; k < dim; ++k) out << ",f" << k;
    out << '\n';
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto y = static_cast<std::size_t>(labels[i]);
      out << (y < report.class_names.size() ? report.class_names[y] : std::to_string(y)) << ','
          << snr_label(snrs[i]);
      for (std::size_t k = 0; k < dim; ++k) out << ',' << features[i * dim + k];
      out << '\n';
    }
  }
}

}  // namespace kgamc::eval
