#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "xmutest/errors.hpp"
#include "xmutest/util.hpp"
#include "xmutest/xngram.hpp"

using namespace xmutest;

namespace {

// Independent brute-force evaluation of the scoring formula, written directly
// from the per-token definition rather than via shared n-gram bookkeeping.
std::vector<double> oracle_raw_scores(const Predictor& pred, const TokenSequence& seq,
                                      const NgramWeights& w, Label c, double p_orig) {
    const int L = static_cast<int>(seq.size());
    std::vector<double> e(L, 0.0);
    for (int t = 0; t < L; ++t) {
        for (int n = 1; n <= 3; ++n) {
            if (n > L) continue;
            double sum = 0.0;
            int count = 0;
            for (int start = std::max(0, t - n + 1); start <= std::min(t, L - n); ++start) {
                TokenSequence sub(seq.begin() + start, seq.begin() + start + n);
                sum += std::abs(p_orig - pred.predict(sub).of(c));
                ++count;
            }
            if (count > 0) e[t] += w.of(n) * sum / count;
        }
    }
    return e;
}

std::vector<double> oracle_normalized(const std::vector<double>& raw) {
    double total = 0.0;
    for (double x : raw) total += x;
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        out[i] = total > 0 ? raw[i] / total : 1.0 / raw.size();
    return out;
}

TokenSequence make_seq(int len) {
    TokenSequence seq;
    for (int i = 0; i < len; ++i) seq.push_back(std::string(1, static_cast<char>('a' + i)));
    return seq;
}

// Stub with a probability entry for every contiguous sub-sequence.
StubPredictor random_stub(const TokenSequence& seq, SplitMix64& rng) {
    StubPredictor stub;
    const int L = static_cast<int>(seq.size());
    for (int n = 1; n <= L; ++n) {
        for (int start = 0; start + n <= L; ++start) {
            double p = rng.uniform();
            stub.set(TokenSequence(seq.begin() + start, seq.begin() + start + n), {p, 1.0 - p});
        }
    }
    return stub;
}

}  // namespace

TEST_CASE("enumerate_ngrams counts and order") {
    CHECK(enumerate_ngrams(1).size() == 1);
    CHECK(enumerate_ngrams(3).size() == 6);
    CHECK(enumerate_ngrams(5).size() == 12);
    auto grams = enumerate_ngrams(3);
    CHECK(grams[0].n == 1);
    CHECK(grams[3].n == 2);
    CHECK(grams[5].n == 3);
    for (std::size_t i = 1; i < grams.size(); ++i) {
        CHECK((grams[i].n > grams[i - 1].n ||
               (grams[i].n == grams[i - 1].n && grams[i].start > grams[i - 1].start)));
    }
    CHECK_THROWS_AS(enumerate_ngrams(0), ArgumentError);
}

TEST_CASE("ngram_delta on stub tables") {
    TokenSequence seq = {"a", "b", "c"};
    StubPredictor stub;
    stub.set(seq, {0.9, 0.1});
    stub.set({"a", "b"}, {0.4, 0.6});
    CHECK(ngram_delta(stub, seq, {0, 2}, Label::HATE) == doctest::Approx(0.5));
    // whole sequence as the n-gram: delta is 0
    CHECK(ngram_delta(stub, seq, {0, 3}, Label::HATE) == doctest::Approx(0.0));
    // constant predictor: all deltas 0
    StubPredictor flat({0.7, 0.3});
    for (auto ng : enumerate_ngrams(3))
        CHECK(ngram_delta(flat, seq, ng, Label::HATE) == doctest::Approx(0.0));
}

TEST_CASE("token_scores worked example") {
    TokenSequence seq = {"a", "b", "c"};
    StubPredictor stub;
    stub.set(seq, {0.9, 0.1});
    stub.set({"a"}, {0.6, 0.4});
    stub.set({"b"}, {0.5, 0.5});
    stub.set({"c"}, {0.9, 0.1});
    stub.set({"a", "b"}, {0.4, 0.6});
    stub.set({"b", "c"}, {0.8, 0.2});
    auto scores = token_scores(stub, seq);
    CHECK(scores.reference_class == Label::HATE);
    CHECK(scores.p_orig == doctest::Approx(0.9));
    REQUIRE(scores.raw.size() == 3);
    CHECK(scores.raw[0] == doctest::Approx(0.30).epsilon(1e-12));
    CHECK(scores.raw[1] == doctest::Approx(0.29).epsilon(1e-12));
    CHECK(scores.raw[2] == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(scores.normalized[0] == doctest::Approx(0.30 / 0.62).epsilon(1e-9));
    CHECK(scores.normalized[1] == doctest::Approx(0.29 / 0.62).epsilon(1e-9));
    CHECK(scores.normalized[2] == doctest::Approx(0.03 / 0.62).epsilon(1e-9));
    CHECK(top_tokens(scores, 1) == std::vector<int>{0});
}

TEST_CASE("token_scores matches the brute-force oracle") {
    SplitMix64 rng(2024);
    for (int len = 1; len <= 6; ++len) {
        auto seq = make_seq(len);
        for (int trial = 0; trial < 20; ++trial) {
            auto stub = random_stub(seq, rng);
            const ProbDist full = stub.predict(seq);
            const Label c = full.p_not_hate > full.p_hate ? Label::NOT_HATE : Label::HATE;
            auto expected_raw = oracle_raw_scores(stub, seq, {}, c, full.of(c));
            auto expected_norm = oracle_normalized(expected_raw);
            auto got = token_scores(stub, seq);
            REQUIRE(got.reference_class == c);
            for (int t = 0; t < len; ++t) {
                CHECK(std::abs(got.raw[t] - expected_raw[t]) < 1e-9);
                CHECK(std::abs(got.normalized[t] - expected_norm[t]) < 1e-9);
            }
        }
    }
}

TEST_CASE("parallel and serial scoring agree bit-exactly") {
    SplitMix64 rng(7);
    for (int len = 1; len <= 6; ++len) {
        auto seq = make_seq(len);
        auto stub = random_stub(seq, rng);
        auto par = token_scores(stub, seq, {}, true);
        auto ser = token_scores_serial(stub, seq);
        CHECK(par.raw == ser.raw);
        CHECK(par.normalized == ser.normalized);
    }
}

TEST_CASE("degenerate all-zero deltas give exactly uniform scores") {
    StubPredictor flat({0.8, 0.2});
    auto seq = make_seq(4);
    auto scores = token_scores(flat, seq);
    for (double v : scores.normalized) CHECK(v == 0.25);
}

TEST_CASE("normalization invariants on random stubs") {
    SplitMix64 rng(55);
    for (int trial = 0; trial < 300; ++trial) {
        const int len = 1 + static_cast<int>(rng.below(6));
        auto seq = make_seq(len);
        auto stub = random_stub(seq, rng);
        auto scores = token_scores(stub, seq);
        double sum = 0.0;
        for (double v : scores.normalized) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("locality: one n-gram's entry only moves tokens inside it") {
    auto seq = make_seq(5);
    SplitMix64 rng(31);
    auto stub = random_stub(seq, rng);
    auto base = token_scores(stub, seq);
    // change the bigram at start 1 ("b","c")
    StubPredictor changed = stub;
    changed.set({"b", "c"}, {0.987, 0.013});
    auto after = token_scores(changed, seq);
    for (int t = 0; t < 5; ++t) {
        if (t == 1 || t == 2) continue;
        CHECK(after.raw[t] == doctest::Approx(base.raw[t]).epsilon(1e-12));
    }
}

TEST_CASE("top_tokens ordering and ties") {
    ExplanationScores s;
    s.normalized = {0.5, 0.3, 0.2};
    CHECK(top_tokens(s, 2) == std::vector<int>{0, 1});
    ExplanationScores tie;
    tie.normalized = {0.25, 0.25, 0.25, 0.25};
    CHECK(top_tokens(tie, 2) == std::vector<int>{0, 1});
    CHECK_THROWS_AS(top_tokens(s, 0), ArgumentError);
    CHECK_THROWS_AS(top_tokens(s, 4), ArgumentError);
}

TEST_CASE("top_tokens invariant under positive scaling of deltas") {
    // scaling every stub probability gap by a constant rescales E but not E~
    auto seq = make_seq(4);
    StubPredictor s1, s2;
    s1.set(seq, {0.9, 0.1});
    s2.set(seq, {0.9, 0.1});
    SplitMix64 rng(13);
    for (auto ng : enumerate_ngrams(4)) {
        if (ng.n == 4) continue;
        double gap = rng.uniform() * 0.4;
        s1.set(ngram_slice(seq, ng), {0.9 - gap, 0.1 + gap});
        s2.set(ngram_slice(seq, ng), {0.9 - gap / 2, 0.1 + gap / 2});
    }
    auto a = token_scores(s1, seq);
    auto b = token_scores(s2, seq);
    for (int t = 0; t < 4; ++t)
        CHECK(a.normalized[t] == doctest::Approx(b.normalized[t]).epsilon(1e-9));
    CHECK(top_tokens(a, 4) == top_tokens(b, 4));
}

TEST_CASE("ngram weights validation") {
    CHECK_THROWS_AS(token_scores(StubPredictor{}, make_seq(2), NgramWeights{0.5, 0.5, 0.5}), ArgumentError);
    CHECK_THROWS_AS(token_scores(StubPredictor{}, make_seq(2), NgramWeights{-0.2, 0.6, 0.6}), ArgumentError);
    CHECK_THROWS_AS(token_scores(StubPredictor{}, {}), ArgumentError);
}
