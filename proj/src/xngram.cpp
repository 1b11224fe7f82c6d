#include "xmutest/xngram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "xmutest/errors.hpp"

namespace xmutest {

void NgramWeights::validate() const {
    if (w1 < 0 || w2 < 0 || w3 < 0)
        throw ArgumentError("n-gram weights must be nonnegative");
    if (std::abs(w1 + w2 + w3 - 1.0) > 1e-9)
        throw ArgumentError("n-gram weights must sum to 1");
}

std::vector<Ngram> enumerate_ngrams(int sequence_length) {
    if (sequence_length < 1) throw ArgumentError("enumerate_ngrams: empty sequence");
    std::vector<Ngram> out;
    for (int n = 1; n <= 3; ++n)
        for (int start = 0; start + n <= sequence_length; ++start)
            out.push_back({start, n});
    return out;
}

TokenSequence ngram_slice(const TokenSequence& seq, Ngram ng) {
    return TokenSequence(seq.begin() + ng.start, seq.begin() + ng.start + ng.n);
}

double ngram_delta(const Predictor& predictor, const TokenSequence& seq, Ngram ng, Label c) {
    const double p_orig = predictor.predict(seq).of(c);
    const double p_ng = predictor.predict(ngram_slice(seq, ng)).of(c);
    return std::abs(p_orig - p_ng);
}

namespace {

ExplanationScores scores_from_deltas(const TokenSequence& seq, const std::vector<Ngram>& ngrams,
                                     const std::vector<double>& deltas, const NgramWeights& weights,
                                     Label c, double p_orig) {
    const int L = static_cast<int>(seq.size());
    // per token and n: sum of deltas and count of containing n-grams
    std::vector<double> delta_sum(static_cast<std::size_t>(L) * 3, 0.0);
    std::vector<int> counts(static_cast<std::size_t>(L) * 3, 0);
    for (std::size_t g = 0; g < ngrams.size(); ++g) {
        const Ngram ng = ngrams[g];
        for (int t = ng.start; t < ng.start + ng.n; ++t) {
            delta_sum[static_cast<std::size_t>(t) * 3 + (ng.n - 1)] += deltas[g];
            counts[static_cast<std::size_t>(t) * 3 + (ng.n - 1)] += 1;
        }
    }
    ExplanationScores out;
    out.reference_class = c;
    out.p_orig = p_orig;
    out.raw.resize(L, 0.0);
    for (int t = 0; t < L; ++t) {
        double e = 0.0;
        for (int n = 1; n <= 3; ++n) {
            const int cnt = counts[static_cast<std::size_t>(t) * 3 + (n - 1)];
            if (cnt > 0)
                e += weights.of(n) * delta_sum[static_cast<std::size_t>(t) * 3 + (n - 1)] / cnt;
        }
        out.raw[t] = e;
    }
    const double total = std::accumulate(out.raw.begin(), out.raw.end(), 0.0);
    out.normalized.resize(L);
    if (total > 0.0) {
        for (int t = 0; t < L; ++t) out.normalized[t] = out.raw[t] / total;
    } else {
        std::fill(out.normalized.begin(), out.normalized.end(), 1.0 / L);
    }
    return out;
}

}  // namespace

ExplanationScores token_scores(const Predictor& predictor, const TokenSequence& seq,
                               const NgramWeights& weights, bool parallel) {
    if (seq.empty()) throw ArgumentError("token_scores: empty sequence");
    weights.validate();

    const ProbDist full = predictor.predict(seq);
    const Label c = full.p_not_hate > full.p_hate ? Label::NOT_HATE : Label::HATE;
    const double p_orig = full.of(c);

    const auto ngrams = enumerate_ngrams(static_cast<int>(seq.size()));
    std::vector<double> deltas(ngrams.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::size_t g = 0; g < ngrams.size(); ++g)
            deltas[g] = std::abs(p_orig - predictor.predict(ngram_slice(seq, ngrams[g])).of(c));
    } else {
        for (std::size_t g = 0; g < ngrams.size(); ++g)
            deltas[g] = std::abs(p_orig - predictor.predict(ngram_slice(seq, ngrams[g])).of(c));
    }
    return scores_from_deltas(seq, ngrams, deltas, weights, c, p_orig);
}

ExplanationScores token_scores_serial(const Predictor& predictor, const TokenSequence& seq,
                                      const NgramWeights& weights) {
    return token_scores(predictor, seq, weights, /*parallel=*/false);
}

std::vector<int> top_tokens(const ExplanationScores& scores, int k) {
    const int L = static_cast<int>(scores.normalized.size());
    if (k < 1 || k > L) throw ArgumentError("top_tokens: k out of range");
    std::vector<int> idx(L);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return scores.normalized[a] > scores.normalized[b];
    });
    idx.resize(k);
    return idx;
}

}  // namespace xmutest
