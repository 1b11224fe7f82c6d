#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xmutest/corpus.hpp"
#include "xmutest/predictor.hpp"

namespace xmutest {

struct ClassificationMetrics {
    double accuracy = 0.0;
    double f1_hate = 0.0;   // HATE as the positive class
    double macro_f1 = 0.0;  // unweighted mean of per-class F1
};

ClassificationMetrics classification_metrics(const std::vector<Label>& preds,
                                             const std::vector<Label>& golds);

// Set-overlap F1 between predicted and gold token indices.
double token_f1(const std::set<int>& pred, const std::set<int>& gold);

// Jaccard overlap; both-empty is undefined (callers skip such samples).
double iou(const std::set<int>& pred, const std::set<int>& gold);

// Instance-level F1 where a sample is a hit iff IOU strictly exceeds 0.5.
// Precision over samples with nonempty pred, recall over nonempty gold.
double iou_f1(const std::vector<std::pair<std::set<int>, std::set<int>>>& samples);

// Faithfulness, both relative to the predicted class on the full input.
// Comprehensiveness masks the rationale tokens in place; sufficiency masks
// everything else. Masking substitutes mask_surface, never deletes.
double comprehensiveness(const Predictor& predictor, const TokenSequence& tokens,
                         const std::set<int>& rationale, const std::string& mask_surface = kMaskSurface);
double sufficiency(const Predictor& predictor, const TokenSequence& tokens,
                   const std::set<int>& rationale, const std::string& mask_surface = kMaskSurface);

struct MetricReport {
    double accuracy = 0.0;
    double f1_hate = 0.0;
    double macro_f1 = 0.0;
    double token_f1 = 0.0;  // mean over samples with nonempty gold
    double iou_f1 = 0.0;
    double comprehensiveness = 0.0;  // means over evaluated samples
    double sufficiency = 0.0;
    int n_classified = 0;
    int n_plausibility = 0;
    int n_faithfulness = 0;
};

// One evaluated sample: gold label plus the predicted rationale sets
// (plausibility set sized by the top-k rule, faithfulness set top-5).
struct EvalInput {
    const Sample* sample = nullptr;
    std::set<int> plausibility_pred;
    std::set<int> faithfulness_pred;
};

MetricReport evaluate(const Predictor& predictor, const std::vector<EvalInput>& inputs,
                      const std::string& mask_surface = kMaskSurface);

std::string format_report_table(const MetricReport& report);

}  // namespace xmutest
