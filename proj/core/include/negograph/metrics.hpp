#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace negograph {

/// Row per instance, column per label.
using LabelMatrix = std::vector<std::vector<bool>>;
using ScoreMatrix = std::vector<std::vector<double>>;

struct F1Scores {
  double macro = 0.0;
  double micro = 0.0;
  double weighted = 0.0;
};

/// Per-label F1 = 2tp / (2tp + fp + fn). Macro averages labels that have a
/// gold or predicted positive; weighted uses gold support; micro pools all
/// decisions. With no positives anywhere (gold and prediction both empty)
/// every score is 1. `labels` restricts the columns considered (all if empty).
F1Scores multilabel_f1(const LabelMatrix& gold, const LabelMatrix& pred,
                       std::span<const std::size_t> labels = {});
/// Single-label classification scored one-vs-rest over `classes` columns.
F1Scores multiclass_f1(std::span<const std::size_t> gold, std::span<const std::size_t> pred,
                       std::size_t classes);

/// Area under the ROC curve with tie-averaged ranks; NaN when one of the
/// classes is absent.
double roc_auc(std::span<const double> scores, const std::vector<bool>& labels);

struct AucScores {
  double macro = 0.0;
  double micro = 0.0;
  double weighted = 0.0;
  /// Labels with both classes present (the ones macro averages over).
  std::size_t defined_labels = 0;
};

/// One-vs-rest per label; labels lacking positives or negatives are skipped
/// for macro and weighted. Micro flattens (instance, label) pairs.
AucScores multilabel_auc(const LabelMatrix& gold, const ScoreMatrix& scores,
                         std::span<const std::size_t> labels = {});

/// Corpus BLEU-4 on a 0..100 scale: clipped n-gram precisions pooled over
/// the corpus, add-one smoothing for n >= 2, brevity penalty on total lengths.
double corpus_bleu(const std::vector<std::vector<std::string>>& hypotheses,
                   const std::vector<std::vector<std::string>>& references);

double accuracy(std::span<const std::size_t> gold, std::span<const std::size_t> pred);

}  // namespace negograph
