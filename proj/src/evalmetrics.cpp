#include "xmutest/evalmetrics.hpp"

#include <algorithm>
#include <cstdio>

#include "xmutest/errors.hpp"

namespace xmutest {

ClassificationMetrics classification_metrics(const std::vector<Label>& preds,
                                             const std::vector<Label>& golds) {
    if (preds.size() != golds.size())
        throw ArgumentError("classification_metrics: length mismatch");
    if (preds.empty()) throw ArgumentError("classification_metrics: empty inputs");

    // confusion counts with HATE as positive
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] == Label::HATE;
        const bool g = golds[i] == Label::HATE;
        if (p && g) ++tp;
        else if (p && !g) ++fp;
        else if (!p && g) ++fn;
        else ++tn;
    }
    auto f1 = [](double tp_, double fp_, double fn_) {
        const double denom = 2 * tp_ + fp_ + fn_;
        return denom > 0 ? 2 * tp_ / denom : 0.0;
    };
    ClassificationMetrics m;
    m.accuracy = (tp + tn) / static_cast<double>(preds.size());
    m.f1_hate = f1(tp, fp, fn);
    const double f1_not = f1(tn, fn, fp);
    m.macro_f1 = 0.5 * (m.f1_hate + f1_not);
    return m;
}

namespace {

std::size_t intersection_size(const std::set<int>& a, const std::set<int>& b) {
    std::size_t n = 0;
    for (int x : a)
        if (b.count(x)) ++n;
    return n;
}

}  // namespace

double token_f1(const std::set<int>& pred, const std::set<int>& gold) {
    const std::size_t inter = intersection_size(pred, gold);
    if (pred.empty() || gold.empty() || inter == 0) return 0.0;
    const double precision = static_cast<double>(inter) / pred.size();
    const double recall = static_cast<double>(inter) / gold.size();
    return 2 * precision * recall / (precision + recall);
}

double iou(const std::set<int>& pred, const std::set<int>& gold) {
    std::set<int> uni = pred;
    uni.insert(gold.begin(), gold.end());
    if (uni.empty()) throw UndefinedStatisticError("iou: both sets empty");
    return static_cast<double>(intersection_size(pred, gold)) / uni.size();
}

double iou_f1(const std::vector<std::pair<std::set<int>, std::set<int>>>& samples) {
    std::size_t hits = 0, n_pred = 0, n_gold = 0;
    for (const auto& [pred, gold] : samples) {
        if (!pred.empty()) ++n_pred;
        if (!gold.empty()) ++n_gold;
        if (pred.empty() && gold.empty()) continue;
        if (iou(pred, gold) > 0.5) ++hits;  // strict: exactly 0.5 is not a hit
    }
    if (n_gold == 0) throw UndefinedStatisticError("iou_f1: no samples with nonempty gold");
    const double precision = n_pred > 0 ? static_cast<double>(hits) / n_pred : 0.0;
    const double recall = static_cast<double>(hits) / n_gold;
    if (precision + recall == 0.0) return 0.0;
    return 2 * precision * recall / (precision + recall);
}

namespace {

TokenSequence mask_tokens(const TokenSequence& tokens, const std::set<int>& to_mask,
                          const std::string& mask_surface) {
    TokenSequence out = tokens;
    for (int i : to_mask)
        if (i >= 0 && i < static_cast<int>(out.size())) out[i] = mask_surface;
    return out;
}

Label predicted_class(const Predictor& predictor, const TokenSequence& tokens) {
    const ProbDist p = predictor.predict(tokens);
    return p.p_not_hate > p.p_hate ? Label::NOT_HATE : Label::HATE;
}

}  // namespace

double comprehensiveness(const Predictor& predictor, const TokenSequence& tokens,
                         const std::set<int>& rationale, const std::string& mask_surface) {
    if (tokens.empty()) throw ArgumentError("comprehensiveness: empty sample");
    if (rationale.empty()) return 0.0;
    const Label c = predicted_class(predictor, tokens);
    const double p_full = predictor.predict(tokens).of(c);
    const double p_masked = predictor.predict(mask_tokens(tokens, rationale, mask_surface)).of(c);
    return p_full - p_masked;
}

double sufficiency(const Predictor& predictor, const TokenSequence& tokens,
                   const std::set<int>& rationale, const std::string& mask_surface) {
    if (tokens.empty()) throw ArgumentError("sufficiency: empty sample");
    std::set<int> complement;
    for (int i = 0; i < static_cast<int>(tokens.size()); ++i)
        if (!rationale.count(i)) complement.insert(i);
    if (complement.empty()) return 0.0;  // rationale covers everything
    const Label c = predicted_class(predictor, tokens);
    const double p_full = predictor.predict(tokens).of(c);
    const double p_rat = predictor.predict(mask_tokens(tokens, complement, mask_surface)).of(c);
    return p_full - p_rat;
}

MetricReport evaluate(const Predictor& predictor, const std::vector<EvalInput>& inputs,
                      const std::string& mask_surface) {
    MetricReport report;
    std::vector<Label> preds, golds;
    std::vector<std::pair<std::set<int>, std::set<int>>> iou_pairs;
    double token_f1_sum = 0.0;
    double comp_sum = 0.0, suff_sum = 0.0;
    for (const auto& in : inputs) {
        const Sample& s = *in.sample;
        if (s.tokens.empty()) continue;
        preds.push_back(predicted_class(predictor, s.tokens));
        golds.push_back(s.label);

        if (s.gold_rationale) {
            std::set<int> gold;
            for (std::size_t t = 0; t < s.gold_rationale->size(); ++t)
                if ((*s.gold_rationale)[t]) gold.insert(static_cast<int>(t));
            if (!gold.empty()) {
                token_f1_sum += token_f1(in.plausibility_pred, gold);
                iou_pairs.emplace_back(in.plausibility_pred, gold);
                ++report.n_plausibility;
            }
        }
        comp_sum += comprehensiveness(predictor, s.tokens, in.faithfulness_pred, mask_surface);
        suff_sum += sufficiency(predictor, s.tokens, in.faithfulness_pred, mask_surface);
        ++report.n_faithfulness;
    }
    report.n_classified = static_cast<int>(preds.size());
    if (!preds.empty()) {
        const auto cm = classification_metrics(preds, golds);
        report.accuracy = cm.accuracy;
        report.f1_hate = cm.f1_hate;
        report.macro_f1 = cm.macro_f1;
    }
    if (report.n_plausibility > 0) {
        report.token_f1 = token_f1_sum / report.n_plausibility;
        report.iou_f1 = iou_f1(iou_pairs);
    }
    if (report.n_faithfulness > 0) {
        report.comprehensiveness = comp_sum / report.n_faithfulness;
        report.sufficiency = suff_sum / report.n_faithfulness;
    }
    return report;
}

std::string format_report_table(const MetricReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%-8s %-8s %-9s %-10s %-8s %-8s %-8s\n"
                  "%-8.4f %-8.4f %-9.4f %-10.4f %-8.4f %-8.4f %-8.4f\n",
                  "Acc", "F1", "Macro-F1", "Token-F1", "IOU-F1", "Comp", "Suff",
                  r.accuracy, r.f1_hate, r.macro_f1, r.token_f1, r.iou_f1,
                  r.comprehensiveness, r.sufficiency);
    return buf;
}

}  // namespace xmutest
