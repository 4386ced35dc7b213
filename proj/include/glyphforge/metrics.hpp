#pragma once

#include <cstddef>
#include <span>

namespace glyphforge {

inline constexpr double kDecisionThreshold = 0.5;

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Scores >= threshold count as class 1.
Confusion confusion_at(std::span<const double> scores, std::span<const int> labels,
                       double threshold = kDecisionThreshold);

/// Mann-Whitney statistic: fraction of (positive, negative) pairs ranked
/// correctly, ties counted half. Throws OneClassOnly.
double auc(std::span<const double> scores, std::span<const int> labels);

struct BinaryMetrics {
  double loss = 0.0;  // mean binary cross-entropy
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double auc = 0.0;
  // Zero denominators (or a single class for auc) report 0 with the flag cleared.
  bool precision_defined = false;
  bool recall_defined = false;
  bool auc_defined = false;
  Confusion confusion;
};

BinaryMetrics binary_metrics(std::span<const double> scores, std::span<const int> labels);

}  // namespace glyphforge
