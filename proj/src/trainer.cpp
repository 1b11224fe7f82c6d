#include "xmutest/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xmutest/errors.hpp"
#include "xmutest/util.hpp"

namespace xmutest {

double attention_loss(const AttentionProfile& profile, const RationaleVector& rationale) {
    if (profile.weights.size() != rationale.size())
        throw ArgumentError("attention_loss: length mismatch");
    double total = std::accumulate(rationale.begin(), rationale.end(), 0.0);
    if (total == 0.0) return 0.0;
    double loss = 0.0;
    for (std::size_t i = 0; i < rationale.size(); ++i) {
        if (!rationale[i]) continue;
        const double target = rationale[i] / total;
        loss -= target * std::log(std::max(profile.weights[i], 1e-12));
    }
    return loss;
}

double classification_loss(const ProbDist& pred, Label label) {
    return -std::log(std::max(pred.of(label), 1e-12));
}

LossRecord combined_loss(double l_att, double l_cl, double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw ArgumentError("alpha must be in [0, 1]");
    return {l_att, l_cl, alpha * l_att + (1.0 - alpha) * l_cl};
}

int stage2_k(int sequence_length) {
    if (sequence_length < 1) throw ArgumentError("stage2_k: L must be >= 1");
    return sequence_length >= 10 ? 5 : (sequence_length + 1) / 2;
}

GradientBundle loss_and_gradients(const ReferenceAttentionClassifier& model, const TokenSequence& seq,
                                  Label label, const RationaleVector* rationale, double alpha) {
    if (seq.empty()) throw ArgumentError("loss_and_gradients: empty sequence");
    if (alpha < 0.0 || alpha > 1.0) throw ArgumentError("alpha must be in [0, 1]");
    const int d = model.dim();
    const auto ids = model.to_ids(seq);
    const std::size_t L = ids.size();
    const auto& emb = model.embeddings();
    const auto& cls = model.cls_vector();
    const auto& w = model.head_weights();
    const auto& b = model.head_bias();

    // forward
    std::vector<double> scores(L);
    for (std::size_t i = 0; i < L; ++i) {
        const double* h = &emb[static_cast<std::size_t>(ids[i]) * d];
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += h[k] * cls[k];
        scores[i] = s;
    }
    const double max_s = *std::max_element(scores.begin(), scores.end());
    std::vector<double> a(L);
    double z_sum = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        a[i] = std::exp(scores[i] - max_s);
        z_sum += a[i];
    }
    for (auto& ai : a) ai /= z_sum;

    std::vector<double> pooled(d, 0.0);
    for (std::size_t i = 0; i < L; ++i) {
        const double* h = &emb[static_cast<std::size_t>(ids[i]) * d];
        for (int k = 0; k < d; ++k) pooled[k] += a[i] * h[k];
    }
    double logits[2] = {b[0], b[1]};
    for (int k = 0; k < d; ++k) {
        logits[0] += w[k] * pooled[k];
        logits[1] += w[d + k] * pooled[k];
    }
    const double lm = std::max(logits[0], logits[1]);
    double q[2] = {std::exp(logits[0] - lm), std::exp(logits[1] - lm)};
    const double qs = q[0] + q[1];
    q[0] /= qs;
    q[1] /= qs;

    // target distribution over attention, if any
    std::vector<double> target;
    bool has_target = false;
    if (rationale) {
        if (rationale->size() != L) throw ArgumentError("rationale length mismatch");
        const double total = std::accumulate(rationale->begin(), rationale->end(), 0.0);
        if (total > 0.0) {
            has_target = true;
            target.resize(L);
            for (std::size_t i = 0; i < L; ++i) target[i] = (*rationale)[i] / total;
        }
    }

    GradientBundle out;
    double l_att = 0.0;
    if (has_target)
        for (std::size_t i = 0; i < L; ++i)
            if (target[i] > 0.0) l_att -= target[i] * std::log(std::max(a[i], 1e-12));
    const int y = label == Label::HATE ? 0 : 1;
    const double l_cl = -std::log(std::max(q[y], 1e-12));
    out.loss = combined_loss(l_att, l_cl, alpha);

    // backward
    out.d_embeddings.assign(emb.size(), 0.0);
    out.d_cls.assign(cls.size(), 0.0);
    out.d_head_w.assign(w.size(), 0.0);
    out.d_head_b.assign(b.size(), 0.0);

    double dz[2] = {(1.0 - alpha) * (q[0] - (y == 0 ? 1.0 : 0.0)),
                    (1.0 - alpha) * (q[1] - (y == 1 ? 1.0 : 0.0))};
    std::vector<double> dp(d, 0.0);
    for (int c = 0; c < 2; ++c) {
        out.d_head_b[c] = dz[c];
        for (int k = 0; k < d; ++k) {
            out.d_head_w[static_cast<std::size_t>(c) * d + k] = dz[c] * pooled[k];
            dp[k] += dz[c] * w[static_cast<std::size_t>(c) * d + k];
        }
    }
    // attention weights receive gradient via pooling and (if present) L_att
    std::vector<double> g(L, 0.0);
    for (std::size_t i = 0; i < L; ++i) {
        const double* h = &emb[static_cast<std::size_t>(ids[i]) * d];
        for (int k = 0; k < d; ++k) g[i] += dp[k] * h[k];
    }
    double g_dot_a = 0.0;
    for (std::size_t i = 0; i < L; ++i) g_dot_a += a[i] * g[i];
    std::vector<double> ds(L);
    for (std::size_t i = 0; i < L; ++i) {
        ds[i] = a[i] * (g[i] - g_dot_a);
        if (has_target) ds[i] += alpha * (a[i] - target[i]);
    }
    for (std::size_t i = 0; i < L; ++i) {
        double* de = &out.d_embeddings[static_cast<std::size_t>(ids[i]) * d];
        const double* h = &emb[static_cast<std::size_t>(ids[i]) * d];
        for (int k = 0; k < d; ++k) {
            de[k] += a[i] * dp[k] + ds[i] * cls[k];
            out.d_cls[k] += ds[i] * h[k];
        }
    }
    return out;
}

namespace {

void sgd_step(ReferenceAttentionClassifier& model, const GradientBundle& g, double lr) {
    auto apply = [lr](std::vector<double>& p, const std::vector<double>& dp) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * dp[i];
    };
    apply(model.embeddings(), g.d_embeddings);
    apply(model.cls_vector(), g.d_cls);
    apply(model.head_weights(), g.d_head_w);
    apply(model.head_bias(), g.d_head_b);
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int stage, int epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(stage * 1000003 + epoch + 1)));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    return order;
}

// One epoch of per-sample SGD. targets[i] == nullptr means classification
// loss only for that sample.
EpochStats run_epoch(ReferenceAttentionClassifier& model, const Corpus& corpus,
                     const std::vector<const RationaleVector*>& targets, double alpha, double lr,
                     std::uint64_t seed, int stage, int epoch) {
    EpochStats stats;
    stats.stage = stage;
    stats.epoch = epoch;
    const auto order = epoch_order(corpus.samples.size(), seed, stage, epoch);
    std::size_t n_used = 0, n_correct = 0;
    for (std::size_t idx : order) {
        const Sample& s = corpus.samples[idx];
        if (s.tokens.empty()) continue;
        auto g = loss_and_gradients(model, s.tokens, s.label, targets[idx], alpha);
        stats.mean_att += g.loss.l_att;
        stats.mean_cl += g.loss.l_cl;
        stats.mean_total += g.loss.l_total;
        const ProbDist pred = model.predict(s.tokens);
        const Label predicted = pred.p_not_hate > pred.p_hate ? Label::NOT_HATE : Label::HATE;
        if (predicted == s.label) ++n_correct;
        sgd_step(model, g, lr);
        ++n_used;
    }
    if (n_used > 0) {
        stats.mean_att /= n_used;
        stats.mean_cl /= n_used;
        stats.mean_total /= n_used;
        stats.train_accuracy = static_cast<double>(n_correct) / n_used;
    }
    return stats;
}

}  // namespace

std::vector<EpochStats> stage1_train(ReferenceAttentionClassifier& model, const Corpus& corpus,
                                     const TrainingConfig& cfg) {
    if (corpus.samples.empty()) throw ArgumentError("stage1_train: empty corpus");
    std::vector<const RationaleVector*> targets(corpus.samples.size(), nullptr);
    for (std::size_t i = 0; i < corpus.samples.size(); ++i)
        if (corpus.samples[i].gold_rationale) targets[i] = &*corpus.samples[i].gold_rationale;
    std::vector<EpochStats> trace;
    for (int e = 0; e < cfg.epochs_stage1; ++e)
        trace.push_back(run_epoch(model, corpus, targets, cfg.alpha_stage1, cfg.learning_rate,
                                  cfg.seed, 1, e));
    return trace;
}

std::vector<EpochStats> stage2_train(ReferenceAttentionClassifier& model, const Corpus& corpus,
                                     const TrainingConfig& cfg) {
    if (corpus.samples.empty()) throw ArgumentError("stage2_train: empty corpus");
    std::vector<EpochStats> trace;
    const std::size_t n = corpus.samples.size();
    std::vector<RationaleVector> masks(n);
    std::vector<const RationaleVector*> targets(n, nullptr);
    for (int e = 0; e < cfg.epochs_stage2; ++e) {
        // rebuild attention targets from the current model snapshot
#pragma omp parallel for schedule(dynamic)
        for (std::size_t i = 0; i < n; ++i) {
            const Sample& s = corpus.samples[i];
            if (s.tokens.empty()) continue;
            const auto scores = token_scores(model, s.tokens, cfg.ngram_weights, /*parallel=*/false);
            const int k = stage2_k(static_cast<int>(s.tokens.size()));
            const auto top = top_tokens(scores, k);
            RationaleVector mask(s.tokens.size(), 0);
            for (int t : top) mask[t] = 1;
            masks[i] = std::move(mask);
        }
        for (std::size_t i = 0; i < n; ++i)
            targets[i] = corpus.samples[i].tokens.empty() ? nullptr : &masks[i];
        trace.push_back(run_epoch(model, corpus, targets, cfg.alpha_stage2, cfg.learning_rate,
                                  cfg.seed, 2, e));
    }
    return trace;
}

}  // namespace xmutest
