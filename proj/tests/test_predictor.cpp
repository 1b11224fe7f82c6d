#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "xmutest/errors.hpp"
#include "xmutest/predictor.hpp"
#include "xmutest/util.hpp"

using namespace xmutest;

namespace {

Vocabulary small_vocab(const std::vector<std::string>& tokens) {
    Vocabulary v;
    for (const auto& t : tokens) v.add(t);
    return v;
}

}  // namespace

TEST_CASE("vocabulary reserved ids and first-seen order") {
    auto v = small_vocab({"b", "a", "b", "c"});
    CHECK(v.lookup("<PAD>") == Vocabulary::kPad);
    CHECK(v.lookup(kMaskSurface) == Vocabulary::kMask);
    CHECK(v.lookup("b") == 3);
    CHECK(v.lookup("a") == 4);
    CHECK(v.lookup("c") == 5);
    CHECK(v.lookup("unseen") == Vocabulary::kUnk);
}

TEST_CASE("attention on identical tokens is uniform") {
    ReferenceAttentionClassifier model(small_vocab({"a"}), 8, 1);
    auto a = model.attention({"a", "a", "a", "a"});
    for (double w : a.weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-12));
    auto single = model.attention({"a"});
    REQUIRE(single.weights.size() == 1);
    CHECK(single.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(model.attention({}), ArgumentError);
}

TEST_CASE("attention matches hand softmax for crafted scores") {
    // d = 1, cls = [1]; embedding of "a" = ln 2, of "b" = 0 -> weights (2/3, 1/3)
    ReferenceAttentionClassifier model(small_vocab({"a", "b"}), 1, 0);
    model.cls_vector() = {1.0};
    model.embeddings()[3] = std::log(2.0);  // id 3 = "a"
    model.embeddings()[4] = 0.0;            // id 4 = "b"
    auto a = model.attention({"a", "b"});
    CHECK(a.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(a.weights[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("predict with zero head is (0.5, 0.5)") {
    ReferenceAttentionClassifier model(small_vocab({"a", "b"}), 4, 7);
    std::fill(model.head_weights().begin(), model.head_weights().end(), 0.0);
    std::fill(model.head_bias().begin(), model.head_bias().end(), 0.0);
    auto p = model.predict({"a", "b"});
    CHECK(p.p_hate == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.p_not_hate == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("predict determinism and normalization") {
    ReferenceAttentionClassifier model(small_vocab({"a", "b", "c"}), 16, 123);
    SplitMix64 rng(5);
    const std::vector<std::string> toks = {"a", "b", "c", "zz"};
    for (int trial = 0; trial < 100; ++trial) {
        TokenSequence seq;
        const int len = 1 + static_cast<int>(rng.below(6));
        for (int i = 0; i < len; ++i) seq.push_back(toks[rng.below(toks.size())]);
        auto p1 = model.predict(seq);
        auto p2 = model.predict(seq);
        CHECK(p1.p_hate == p2.p_hate);
        CHECK(std::abs(p1.p_hate + p1.p_not_hate - 1.0) < 1e-9);
        auto a = model.attention(seq);
        double sum = 0.0;
        for (double w : a.weights) {
            CHECK(w > 0.0);
            sum += w;
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("same seed gives identical initialization") {
    ReferenceAttentionClassifier m1(small_vocab({"a", "b"}), 8, 99);
    ReferenceAttentionClassifier m2(small_vocab({"a", "b"}), 8, 99);
    CHECK(m1.embeddings() == m2.embeddings());
    CHECK(m1.cls_vector() == m2.cls_vector());
    CHECK(m1.content_hash() == m2.content_hash());
}

TEST_CASE("checkpoint round trip is bit exact") {
    ReferenceAttentionClassifier model(small_vocab({"alpha", "βeta", "γ"}), 6, 42);
    model.head_bias()[0] = 0.1234567891234567;
    const std::string path = "ckpt_roundtrip_test.json";
    model.save(path);
    auto loaded = ReferenceAttentionClassifier::load(path);
    CHECK(loaded.dim() == model.dim());
    CHECK(loaded.seed() == model.seed());
    CHECK(loaded.embeddings() == model.embeddings());
    CHECK(loaded.cls_vector() == model.cls_vector());
    CHECK(loaded.head_weights() == model.head_weights());
    CHECK(loaded.head_bias() == model.head_bias());
    CHECK(loaded.content_hash() == model.content_hash());
    auto p1 = model.predict({"alpha", "βeta"});
    auto p2 = loaded.predict({"alpha", "βeta"});
    CHECK(std::memcmp(&p1.p_hate, &p2.p_hate, sizeof(double)) == 0);
    CHECK_THROWS_AS(ReferenceAttentionClassifier::load("missing_ckpt.json"), IoError);
}

TEST_CASE("hex round trip for doubles") {
    SplitMix64 rng(17);
    for (int i = 0; i < 1000; ++i) {
        double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.below(40)) - 20.0);
        CHECK(hex_to_double(double_to_hex(v)) == v);
    }
    CHECK(hex_to_double(double_to_hex(0.0)) == 0.0);
}

TEST_CASE("stub predictor lookup and default") {
    StubPredictor stub({0.5, 0.5});
    stub.set({"a"}, {0.6, 0.4});
    CHECK(stub.predict({"a"}).p_hate == doctest::Approx(0.6));
    CHECK(stub.predict({"b"}).p_hate == doctest::Approx(0.5));
    // statelessness: prior queries don't change answers
    stub.predict({"zzz"});
    CHECK(stub.predict({"a"}).p_hate == doctest::Approx(0.6));
    // keys distinguish token boundaries
    stub.set({"ab"}, {0.9, 0.1});
    stub.set({"a", "b"}, {0.2, 0.8});
    CHECK(stub.predict({"ab"}).p_hate == doctest::Approx(0.9));
    CHECK(stub.predict({"a", "b"}).p_hate == doctest::Approx(0.2));
}
