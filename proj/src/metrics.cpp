#include "glyphforge/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "glyphforge/error.hpp"
#include "glyphforge/nn/loss.hpp"

namespace glyphforge {

namespace {

void check_sizes(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::ShapeMismatch, "scores and labels differ in length");
  for (int l : labels) {
    if (l != 0 && l != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
  }
}

}  // namespace

Confusion confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_sizes(scores, labels);
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      ++(predicted ? c.tp : c.fn);
    } else {
      ++(predicted ? c.fp : c.tn);
    }
  }
  return c;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  check_sizes(scores, labels);
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorCode::OneClassOnly, "auc needs both classes");

  // Rank-sum form: sort once, give tied runs their average rank.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) rank_sum += avg_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

BinaryMetrics binary_metrics(std::span<const double> scores, std::span<const int> labels) {
  BinaryMetrics m;
  m.confusion = confusion_at(scores, labels);
  const auto& c = m.confusion;
  if (scores.empty()) return m;
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) loss += nn::binary_cross_entropy(scores[i], labels[i]).loss;
  m.loss = loss / static_cast<double>(scores.size());
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  m.precision_defined = c.tp + c.fp > 0;
  m.precision = m.precision_defined ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall_defined = c.tp + c.fn > 0;
  m.recall = m.recall_defined ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  m.auc_defined = c.tp + c.fn > 0 && c.tn + c.fp > 0;
  m.auc = m.auc_defined ? auc(scores, labels) : 0.0;
  return m;
}

}  // namespace glyphforge
