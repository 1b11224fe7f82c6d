#pragma once

#include <cstdint>
#include <vector>

#include "xmutest/corpus.hpp"
#include "xmutest/predictor.hpp"
#include "xmutest/xngram.hpp"

namespace xmutest {

struct TrainingConfig {
    double alpha_stage1 = 0.3;
    double alpha_stage2 = 0.6;  // 0.7 for Hindi runs
    int epochs_stage1 = 3;
    int epochs_stage2 = 3;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    NgramWeights ngram_weights{};
};

struct LossRecord {
    double l_att = 0.0;
    double l_cl = 0.0;
    double l_total = 0.0;
};

struct EpochStats {
    int stage = 1;
    int epoch = 0;  // 0-based within stage
    double mean_att = 0.0;
    double mean_cl = 0.0;
    double mean_total = 0.0;
    double train_accuracy = 0.0;
};

// Cross-entropy between the attention profile and the rationale normalized to
// a distribution. All-zero rationale contributes 0 (no attention target).
double attention_loss(const AttentionProfile& profile, const RationaleVector& rationale);

// NLL of the true class, probabilities clamped at 1e-12.
double classification_loss(const ProbDist& pred, Label label);

LossRecord combined_loss(double l_att, double l_cl, double alpha);

// Attention-target size rule: 5 for L >= 10, else ceil(L/2).
int stage2_k(int sequence_length);

// Loss and full analytic gradient of the combined objective for one sample.
// Gradients are laid out to match the model's parameter vectors. Used by the
// SGD step and by the finite-difference checks.
struct GradientBundle {
    LossRecord loss;
    std::vector<double> d_embeddings;
    std::vector<double> d_cls;
    std::vector<double> d_head_w;
    std::vector<double> d_head_b;
};
GradientBundle loss_and_gradients(const ReferenceAttentionClassifier& model, const TokenSequence& seq,
                                  Label label, const RationaleVector* rationale, double alpha);

// Per-sample SGD on the combined loss, attention targets from gold rationales.
// Sample order per epoch is a seeded shuffle; identical (seed, config, corpus)
// gives identical parameter trajectories.
std::vector<EpochStats> stage1_train(ReferenceAttentionClassifier& model, const Corpus& corpus,
                                     const TrainingConfig& cfg);

// Same loop, but before each epoch the attention target of every sample is
// rebuilt from the current model: binary mask over the top stage2_k(L) tokens
// by n-gram explainability score.
std::vector<EpochStats> stage2_train(ReferenceAttentionClassifier& model, const Corpus& corpus,
                                     const TrainingConfig& cfg);

}  // namespace xmutest
