#include "negograph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace negograph {

namespace {

std::vector<std::size_t> label_columns(std::size_t width, std::span<const std::size_t> labels) {
  if (!labels.empty()) {
    for (std::size_t l : labels) {
      if (l >= width) throw std::out_of_range("label column " + std::to_string(l) + " out of range");
    }
    return {labels.begin(), labels.end()};
  }
  std::vector<std::size_t> all(width);
  std::iota(all.begin(), all.end(), 0);
  return all;
}

std::size_t matrix_width(const LabelMatrix& m) { return m.empty() ? 0 : m.front().size(); }

}  // namespace

F1Scores multilabel_f1(const LabelMatrix& gold, const LabelMatrix& pred,
                       std::span<const std::size_t> labels) {
  if (gold.size() != pred.size()) throw std::invalid_argument("f1: gold/pred row count mismatch");
  if (gold.empty()) throw std::invalid_argument("f1: empty evaluation set");
  const std::size_t width = matrix_width(gold);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != width || pred[i].size() != width) {
      throw std::invalid_argument("f1: ragged label matrix");
    }
  }
  const auto cols = label_columns(width, labels);

  F1Scores s;
  double tp_all = 0, fp_all = 0, fn_all = 0;
  double macro_sum = 0, macro_n = 0, weighted_sum = 0, support_sum = 0;
  for (std::size_t c : cols) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool g = gold[i][c], p = pred[i][c];
      tp += (g && p) ? 1 : 0;
      fp += (!g && p) ? 1 : 0;
      fn += (g && !p) ? 1 : 0;
    }
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
    const double denom = 2 * tp + fp + fn;
    if (denom == 0) continue;
    const double f1 = 2 * tp / denom;
    macro_sum += f1;
    macro_n += 1;
    weighted_sum += f1 * (tp + fn);
    support_sum += tp + fn;
  }
  const double denom = 2 * tp_all + fp_all + fn_all;
  if (denom == 0) return {1.0, 1.0, 1.0};
  s.micro = 2 * tp_all / denom;
  s.macro = macro_n > 0 ? macro_sum / macro_n : 0.0;
  s.weighted = support_sum > 0 ? weighted_sum / support_sum : 0.0;
  return s;
}

F1Scores multiclass_f1(std::span<const std::size_t> gold, std::span<const std::size_t> pred,
                       std::size_t classes) {
  if (gold.size() != pred.size()) throw std::invalid_argument("f1: gold/pred size mismatch");
  LabelMatrix g(gold.size(), std::vector<bool>(classes)), p(pred.size(), std::vector<bool>(classes));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] >= classes || pred[i] >= classes) throw std::out_of_range("f1: class out of range");
    g[i][gold[i]] = true;
    p[i][pred[i]] = true;
  }
  return multilabel_f1(g, p);
}

double roc_auc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: size mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos = 0, rank_sum = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]]) {
        pos += 1;
        rank_sum += avg_rank;
      }
    }
    i = j + 1;
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0 || neg == 0) return std::numeric_limits<double>::quiet_NaN();
  return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

AucScores multilabel_auc(const LabelMatrix& gold, const ScoreMatrix& scores,
                         std::span<const std::size_t> labels) {
  if (gold.size() != scores.size()) throw std::invalid_argument("auc: row count mismatch");
  if (gold.empty()) throw std::invalid_argument("auc: empty evaluation set");
  const std::size_t width = matrix_width(gold);
  const auto cols = label_columns(width, labels);

  AucScores s;
  double macro_sum = 0, weighted_sum = 0, support_sum = 0;
  std::vector<double> flat_scores;
  std::vector<bool> flat_labels;
  for (std::size_t c : cols) {
    std::vector<double> col(gold.size());
    std::vector<bool> lab(gold.size());
    double support = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (gold[i].size() != width || scores[i].size() != width) {
        throw std::invalid_argument("auc: ragged matrix");
      }
      col[i] = scores[i][c];
      lab[i] = gold[i][c];
      support += lab[i] ? 1 : 0;
      flat_scores.push_back(col[i]);
      flat_labels.push_back(lab[i]);
    }
    const double auc = roc_auc(col, lab);
    if (std::isnan(auc)) continue;
    ++s.defined_labels;
    macro_sum += auc;
    weighted_sum += auc * support;
    support_sum += support;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.macro = s.defined_labels > 0 ? macro_sum / static_cast<double>(s.defined_labels) : nan;
  s.weighted = support_sum > 0 ? weighted_sum / support_sum : nan;
  s.micro = roc_auc(flat_scores, flat_labels);
  return s;
}

double corpus_bleu(const std::vector<std::vector<std::string>>& hypotheses,
                   const std::vector<std::vector<std::string>>& references) {
  if (hypotheses.size() != references.size()) throw std::invalid_argument("bleu: size mismatch");
  if (hypotheses.empty()) throw std::invalid_argument("bleu: empty corpus");
  constexpr std::size_t kMaxN = 4;
  double matches[kMaxN] = {}, totals[kMaxN] = {};
  double hyp_len = 0, ref_len = 0;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto& hyp = hypotheses[s];
    const auto& ref = references[s];
    hyp_len += static_cast<double>(hyp.size());
    ref_len += static_cast<double>(ref.size());
    for (std::size_t n = 1; n <= kMaxN; ++n) {
      std::map<std::vector<std::string>, int> ref_counts;
      for (std::size_t i = 0; i + n <= ref.size(); ++i) {
        ++ref_counts[std::vector<std::string>(ref.begin() + i, ref.begin() + i + n)];
      }
      std::map<std::vector<std::string>, int> hyp_counts;
      for (std::size_t i = 0; i + n <= hyp.size(); ++i) {
        ++hyp_counts[std::vector<std::string>(hyp.begin() + i, hyp.begin() + i + n)];
      }
      for (const auto& [gram, count] : hyp_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matches[n - 1] += std::min(count, it->second);
        totals[n - 1] += count;
      }
    }
  }
  if (hyp_len == 0 || matches[0] == 0) return 0.0;
  double log_p = std::log(matches[0] / totals[0]);
  for (std::size_t n = 2; n <= kMaxN; ++n) {
    log_p += std::log((matches[n - 1] + 1.0) / (totals[n - 1] + 1.0));
  }
  const double bp = hyp_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
  return 100.0 * bp * std::exp(log_p / kMaxN);
}

double accuracy(std::span<const std::size_t> gold, std::span<const std::size_t> pred) {
  if (gold.size() != pred.size()) throw std::invalid_argument("accuracy: size mismatch");
  if (gold.empty()) throw std::invalid_argument("accuracy: empty evaluation set");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hit += gold[i] == pred[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

}  // namespace negograph
