#pragma once

#include <vector>

#include "xmutest/corpus.hpp"
#include "xmutest/predictor.hpp"

namespace xmutest {

// Contiguous n-gram of a token sequence, n in {1,2,3}.
struct Ngram {
    int start = 0;
    int n = 1;
};

struct NgramWeights {
    double w1 = 0.5;
    double w2 = 0.3;
    double w3 = 0.2;
    double of(int n) const { return n == 1 ? w1 : n == 2 ? w2 : w3; }
    void validate() const;  // nonnegative, sum 1 within 1e-9
};

// Per-token importance for one sample: raw E and normalized E~ (sums to 1).
struct ExplanationScores {
    Label reference_class = Label::HATE;
    double p_orig = 0.0;
    std::vector<double> raw;
    std::vector<double> normalized;
};

// All contiguous n-grams for n in {1,2,3} with n <= L, ordered by (n, start).
std::vector<Ngram> enumerate_ngrams(int sequence_length);

TokenSequence ngram_slice(const TokenSequence& seq, Ngram ng);

// |P_orig,c - P_ng,c| where the n-gram alone is the predictor input.
double ngram_delta(const Predictor& predictor, const TokenSequence& seq, Ngram ng, Label c);

// Importance from probability shifts of n-gram probes:
//   E[t] = sum_n w_n * (1/N_t^(n)) * sum_{ng contains t, |ng|=n} delta(ng)
// normalized to sum 1; all-zero E falls back to uniform. Reference class is
// the predicted class on the full input, ties toward HATE.
// The parallel path fans predictor probes out across OpenMP threads; results
// are accumulated in a fixed order so both paths are bit-identical.
ExplanationScores token_scores(const Predictor& predictor, const TokenSequence& seq,
                               const NgramWeights& weights = {}, bool parallel = true);
ExplanationScores token_scores_serial(const Predictor& predictor, const TokenSequence& seq,
                                      const NgramWeights& weights = {});

// Indices of the k largest normalized scores, descending, ties by lower index.
std::vector<int> top_tokens(const ExplanationScores& scores, int k);

}  // namespace xmutest
