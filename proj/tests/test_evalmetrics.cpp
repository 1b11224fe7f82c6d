#include <doctest.h>

#include <cmath>

#include "xmutest/errors.hpp"
#include "xmutest/evalmetrics.hpp"
#include "xmutest/util.hpp"

using namespace xmutest;

namespace {

constexpr Label H = Label::HATE;
constexpr Label N = Label::NOT_HATE;

// Brute-force confusion-matrix oracle, independent of the library path.
ClassificationMetrics oracle_classification(const std::vector<Label>& preds,
                                            const std::vector<Label>& golds) {
    int counts[2][2] = {{0, 0}, {0, 0}};  // [gold][pred], 0 = HATE
    for (std::size_t i = 0; i < preds.size(); ++i)
        ++counts[golds[i] == H ? 0 : 1][preds[i] == H ? 0 : 1];
    ClassificationMetrics m;
    m.accuracy = static_cast<double>(counts[0][0] + counts[1][1]) / preds.size();
    auto class_f1 = [&](int cls) {
        const double tp = counts[cls][cls];
        double fp = 0, fn = 0;
        for (int g = 0; g < 2; ++g)
            if (g != cls) fp += counts[g][cls];
        for (int p = 0; p < 2; ++p)
            if (p != cls) fn += counts[cls][p];
        const double denom = 2 * tp + fp + fn;
        return denom > 0 ? 2 * tp / denom : 0.0;
    };
    m.f1_hate = class_f1(0);
    m.macro_f1 = (class_f1(0) + class_f1(1)) / 2.0;
    return m;
}

}  // namespace

TEST_CASE("classification metrics worked cases") {
    auto perfect = classification_metrics({H, N, H}, {H, N, H});
    CHECK(perfect.accuracy == doctest::Approx(1.0));
    CHECK(perfect.f1_hate == doctest::Approx(1.0));
    CHECK(perfect.macro_f1 == doctest::Approx(1.0));

    auto half = classification_metrics({H, H, N, N}, {H, N, H, N});
    CHECK(half.accuracy == doctest::Approx(0.5));
    CHECK(half.f1_hate == doctest::Approx(0.5));
    CHECK(half.macro_f1 == doctest::Approx(0.5));

    auto all_n = classification_metrics({N, N, N}, {H, N, H});
    CHECK(all_n.f1_hate == doctest::Approx(0.0));

    CHECK_THROWS_AS(classification_metrics({H}, {H, N}), ArgumentError);
    CHECK_THROWS_AS(classification_metrics({}, {}), ArgumentError);
}

TEST_CASE("classification metrics match the brute-force oracle exhaustively") {
    // all label vectors of length <= 8: treat the bits of (len, p, g)
    for (int len = 1; len <= 8; ++len) {
        const int limit = 1 << len;
        for (int p = 0; p < limit; ++p) {
            for (int g = 0; g < limit; ++g) {
                std::vector<Label> preds(len), golds(len);
                for (int i = 0; i < len; ++i) {
                    preds[i] = (p >> i) & 1 ? H : N;
                    golds[i] = (g >> i) & 1 ? H : N;
                }
                auto got = classification_metrics(preds, golds);
                auto want = oracle_classification(preds, golds);
                CHECK(got.accuracy == doctest::Approx(want.accuracy).epsilon(1e-12));
                CHECK(got.f1_hate == doctest::Approx(want.f1_hate).epsilon(1e-12));
                CHECK(got.macro_f1 == doctest::Approx(want.macro_f1).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("token_f1 and iou worked cases") {
    CHECK(token_f1({0, 1}, {0, 1}) == doctest::Approx(1.0));
    CHECK(token_f1({0, 1}, {1, 2}) == doctest::Approx(0.5));
    CHECK(token_f1({}, {1}) == doctest::Approx(0.0));
    CHECK(token_f1({0}, {}) == doctest::Approx(0.0));

    CHECK(iou({0, 1}, {0, 1}) == doctest::Approx(1.0));
    CHECK(iou({0, 1}, {1, 2}) == doctest::Approx(1.0 / 3.0));
    CHECK(iou({0}, {1}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(iou({}, {}), UndefinedStatisticError);
}

TEST_CASE("jaccard is never above dice") {
    SplitMix64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        std::set<int> a, b;
        for (int i = 0; i < 8; ++i) {
            if (rng.below(2)) a.insert(i);
            if (rng.below(2)) b.insert(i);
        }
        if (a.empty() && b.empty()) continue;
        CHECK(iou(a, b) <= token_f1(a, b) + 1e-12);
    }
}

TEST_CASE("iou_f1 ten-case fixture") {
    using SetPair = std::pair<std::set<int>, std::set<int>>;

    SUBCASE("all identical is 1.0") {
        std::vector<SetPair> cases(4, {{0, 1}, {0, 1}});
        CHECK(iou_f1(cases) == doctest::Approx(1.0));
    }
    SUBCASE("IOU exactly 0.5 is not a hit") {
        std::vector<SetPair> cases = {{{0}, {0, 1}}};  // IOU = 0.5
        CHECK(iou_f1(cases) == doctest::Approx(0.0));
    }
    SUBCASE("hand-computed halves") {
        std::vector<SetPair> cases = {{{0, 1}, {0, 1}}, {{0}, {5}}};
        // hits=1, precision=recall=0.5
        CHECK(iou_f1(cases) == doctest::Approx(0.5));
    }
    SUBCASE("ten mixed cases") {
        std::vector<SetPair> cases = {
            {{0, 1}, {0, 1}},        // iou 1.0 -> hit
            {{2}, {2}},              // hit
            {{0, 1, 2}, {0, 1}},     // iou 2/3 -> hit
            {{0}, {0, 1}},           // iou 0.5 -> miss (strict)
            {{0}, {1}},              // miss
            {{}, {3}},               // miss, empty pred
            {{4, 5}, {4, 5, 6, 7}},  // iou 0.5 -> miss
            {{1, 2}, {1, 2, 3}},     // iou 2/3 -> hit
            {{9}, {8, 9}},           // iou 0.5 -> miss
            {{0, 2}, {0, 2}},        // hit
        };
        // hits = 5, nonempty preds = 9, nonempty golds = 10
        const double precision = 5.0 / 9.0;
        const double recall = 5.0 / 10.0;
        CHECK(iou_f1(cases) == doctest::Approx(2 * precision * recall / (precision + recall)));
    }
    SUBCASE("no evaluable samples") {
        CHECK_THROWS_AS(iou_f1({{{0}, {}}}), UndefinedStatisticError);
    }
}

TEST_CASE("comprehensiveness and sufficiency on stub tables") {
    TokenSequence full = {"you", "bad", "dog"};
    StubPredictor stub({0.5, 0.5});
    stub.set(full, {0.9, 0.1});
    stub.set({"you", kMaskSurface, kMaskSurface}, {0.2, 0.8});
    stub.set({kMaskSurface, "bad", "dog"}, {0.85, 0.15});
    stub.set({kMaskSurface, kMaskSurface, kMaskSurface}, {0.5, 0.5});

    CHECK(comprehensiveness(stub, full, {1, 2}) == doctest::Approx(0.7));
    CHECK(sufficiency(stub, full, {1, 2}) == doctest::Approx(0.9 - 0.85));
    // empty rationale: comp is exactly 0; suff compares against all-MASK
    CHECK(comprehensiveness(stub, full, {}) == 0.0);
    CHECK(sufficiency(stub, full, {}) == doctest::Approx(0.4));
    // full-coverage rationale: suff is exactly 0; comp goes to all-MASK
    CHECK(sufficiency(stub, full, {0, 1, 2}) == 0.0);
    CHECK(comprehensiveness(stub, full, {0, 1, 2}) == doctest::Approx(0.4));
    CHECK_THROWS_AS(comprehensiveness(stub, {}, {0}), ArgumentError);
}

TEST_CASE("faithfulness identities hold for arbitrary stubs") {
    SplitMix64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const int len = 1 + static_cast<int>(rng.below(5));
        TokenSequence seq;
        for (int i = 0; i < len; ++i) seq.push_back("t" + std::to_string(rng.below(4)));
        double p = rng.uniform();
        StubPredictor stub({p, 1.0 - p});
        CHECK(comprehensiveness(stub, seq, {}) == 0.0);
        std::set<int> all;
        for (int i = 0; i < len; ++i) all.insert(i);
        CHECK(sufficiency(stub, seq, all) == 0.0);
    }
}

TEST_CASE("evaluate produces a full report over stub predictions") {
    StubPredictor stub({0.5, 0.5});
    Sample s1;
    s1.id = "a";
    s1.tokens = {"x", "y", "z"};
    s1.label = H;
    s1.gold_rationale = RationaleVector{1, 0, 0};
    Sample s2;
    s2.id = "b";
    s2.tokens = {"p", "q"};
    s2.label = N;
    stub.set(s1.tokens, {0.9, 0.1});
    stub.set(s2.tokens, {0.2, 0.8});

    std::vector<EvalInput> inputs;
    inputs.push_back({&s1, {0, 1}, {0}});
    inputs.push_back({&s2, {}, {0}});
    auto report = evaluate(stub, inputs);
    CHECK(report.n_classified == 2);
    CHECK(report.accuracy == doctest::Approx(1.0));
    CHECK(report.n_plausibility == 1);
    CHECK(report.token_f1 == doctest::Approx(token_f1({0, 1}, {0})));
    CHECK(report.n_faithfulness == 2);
    auto table = format_report_table(report);
    CHECK(table.find("Token-F1") != std::string::npos);
}
