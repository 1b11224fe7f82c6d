// Compares the OpenMP-parallel occlusion scorer against the serial reference
// on synthetic sequences and checks they agree to within 1e-12.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "xmutest/predictor.hpp"
#include "xmutest/util.hpp"
#include "xmutest/xngram.hpp"

using namespace xmutest;

namespace {

// cheap deterministic predictor with per-call cost high enough to measure
struct BusyPredictor : Predictor {
    explicit BusyPredictor(int spin) : spin_(spin) {}
    ProbDist predict(const TokenSequence& seq) const override {
        std::uint64_t h = 1469598103934665603ull;
        for (const auto& t : seq)
            for (char c : t) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
        volatile double sink = 0.0;
        for (int i = 0; i < spin_; ++i) sink = sink + std::sin(static_cast<double>(h % 1000) + i);
        (void)sink;
        const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        return {u, 1.0 - u};
    }
    int spin_;
};

double run(const Predictor& pred, const std::vector<TokenSequence>& seqs, bool parallel,
           std::vector<ExplanationScores>& out) {
    const auto t0 = std::chrono::steady_clock::now();
    out.clear();
    NgramWeights w;
    for (const auto& seq : seqs)
        out.push_back(parallel ? token_scores(pred, seq, w, true) : token_scores_serial(pred, seq, w));
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    const int n_seqs = argc > 1 ? std::atoi(argv[1]) : 40;
    const int seq_len = argc > 2 ? std::atoi(argv[2]) : 24;
    const int spin = argc > 3 ? std::atoi(argv[3]) : 2000;

    SplitMix64 rng(12345);
    std::vector<TokenSequence> seqs;
    for (int i = 0; i < n_seqs; ++i) {
        TokenSequence seq;
        for (int j = 0; j < seq_len; ++j) seq.push_back("w" + std::to_string(rng.below(200)));
        seqs.push_back(std::move(seq));
    }

    BusyPredictor pred(spin);
    std::vector<ExplanationScores> serial_out, parallel_out;
    const double warm = run(pred, seqs, false, serial_out);  // warm caches
    const double t_serial = run(pred, seqs, false, serial_out);
    const double t_parallel = run(pred, seqs, true, parallel_out);
    (void)warm;

    double max_diff = 0.0;
    for (std::size_t i = 0; i < seqs.size(); ++i)
        for (std::size_t t = 0; t < serial_out[i].normalized.size(); ++t)
            max_diff = std::max(max_diff,
                                std::abs(serial_out[i].normalized[t] - parallel_out[i].normalized[t]));

    std::printf("sequences: %d x len %d, predictor spin %d\n", n_seqs, seq_len, spin);
    std::printf("serial:   %.4f s\n", t_serial);
    std::printf("parallel: %.4f s\n", t_parallel);
    std::printf("speedup:  %.2fx\n", t_serial / t_parallel);
    std::printf("max |serial - parallel| over normalized scores: %.3e\n", max_diff);
    if (max_diff > 1e-12) {
        std::printf("MISMATCH\n");
        return 1;
    }
    std::printf("outputs agree\n");
    return 0;
}
