#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "xmutest/corpus.hpp"

namespace xmutest {

struct ProbDist {
    double p_hate = 0.5;
    double p_not_hate = 0.5;
    double of(Label c) const { return c == Label::HATE ? p_hate : p_not_hate; }
};

// Normalized per-token attention weights; strictly positive, summing to 1.
struct AttentionProfile {
    std::vector<double> weights;
};

// The inference capability every scorer and metric depends on. predict must
// be pure between parameter updates and safe for concurrent read.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual ProbDist predict(const TokenSequence& seq) const = 0;
    virtual std::optional<AttentionProfile> attention_profile(const TokenSequence& seq) const {
        return std::nullopt;
    }
};

inline constexpr const char* kMaskSurface = "<MASK>";

struct Vocabulary {
    static constexpr int kPad = 0;
    static constexpr int kMask = 1;
    static constexpr int kUnk = 2;

    std::vector<std::string> id_to_token{ "<PAD>", kMaskSurface, "<UNK>" };
    std::unordered_map<std::string, int> token_to_id{
        { "<PAD>", kPad }, { kMaskSurface, kMask }, { "<UNK>", kUnk } };

    int add(const std::string& token);
    int lookup(const std::string& token) const;  // UNK on miss
    int size() const { return static_cast<int>(id_to_token.size()); }

    // Ids assigned in first-seen corpus order (deterministic from corpus order).
    static Vocabulary build(const Corpus& corpus);
};

// Minimal trainable classifier realizing [CLS]-dot-product attention pooling:
// a_i = softmax_i(h_i . h_cls), pooled = sum a_i h_i, logits = W pooled + b.
// The MASK token has its own trainable embedding row.
class ReferenceAttentionClassifier : public Predictor {
public:
    static constexpr int kDefaultDim = 64;

    ReferenceAttentionClassifier(Vocabulary vocab, int dim, std::uint64_t seed);

    ProbDist predict(const TokenSequence& seq) const override;
    std::optional<AttentionProfile> attention_profile(const TokenSequence& seq) const override {
        return attention(seq);
    }
    AttentionProfile attention(const TokenSequence& seq) const;

    std::vector<int> to_ids(const TokenSequence& seq) const;

    int dim() const { return dim_; }
    std::uint64_t seed() const { return seed_; }
    const Vocabulary& vocab() const { return vocab_; }

    // Flat parameter storage, exposed for training and gradient checks.
    std::vector<double>& embeddings() { return embeddings_; }        // V x d
    std::vector<double>& cls_vector() { return cls_; }               // d
    std::vector<double>& head_weights() { return head_w_; }          // 2 x d
    std::vector<double>& head_bias() { return head_b_; }             // 2
    const std::vector<double>& embeddings() const { return embeddings_; }
    const std::vector<double>& cls_vector() const { return cls_; }
    const std::vector<double>& head_weights() const { return head_w_; }
    const std::vector<double>& head_bias() const { return head_b_; }

    void save(const std::string& path) const;
    static ReferenceAttentionClassifier load(const std::string& path);

    // FNV hash over the bit-exact serialized parameters, for manifests.
    std::uint64_t content_hash() const;

private:
    Vocabulary vocab_;
    int dim_;
    std::uint64_t seed_;
    std::vector<double> embeddings_;
    std::vector<double> cls_;
    std::vector<double> head_w_;
    std::vector<double> head_b_;
};

// Exact-match lookup table for tests; total determinism, default on miss.
class StubPredictor : public Predictor {
public:
    explicit StubPredictor(ProbDist default_dist = {}) : default_(default_dist) {}

    void set(const TokenSequence& seq, ProbDist dist) { table_[key(seq)] = dist; }
    ProbDist predict(const TokenSequence& seq) const override;

    static std::string key(const TokenSequence& seq);

private:
    std::map<std::string, ProbDist> table_;
    ProbDist default_;
};

}  // namespace xmutest
