#pragma once

#include <set>
#include <string>
#include <vector>

#include "xmutest/corpus.hpp"

namespace xmutest {

struct ExplanationSets {
    std::set<int> e_x;
    std::set<int> e_llm;
    std::set<int> e_final;  // union of the two
    double agreement = 1.0;  // Jaccard; both-empty convention: 1.0
};

// LLM consultation source: exactly one of endpoint / fixture_path is active.
// Fixture mode maps sample id -> word array and is fully offline.
struct LlmClientConfig {
    std::string endpoint;
    std::string model = "llama-3.1";
    double timeout_seconds = 30.0;
    int max_retries = 2;
    std::string prompt_template = "default";
    std::string fixture_path;
    std::string api_key;  // sent as bearer token when nonempty
};

struct LlmRationaleResponse {
    std::vector<std::string> raw_words;
    std::set<int> resolved;              // token positions matched in the sample
    std::vector<std::string> unresolved;  // words with no surface match
};

std::set<int> fuse(const std::set<int>& e_x, const std::set<int>& e_llm);

// Jaccard |A n B| / |A u B|; 1.0 when both sets are empty.
double jaccard_agreement(const std::set<int>& e_x, const std::set<int>& e_llm);

ExplanationSets make_explanation_sets(const std::set<int>& e_x, const std::set<int>& e_llm);

// Maps each returned word to ALL token positions whose surface matches after
// NFC normalization and case folding.
std::set<int> resolve_words(const std::vector<std::string>& words, const TokenSequence& tokens,
                            std::vector<std::string>* unresolved = nullptr);

// Asks the configured source for the hateful-word list of one sample.
// Unparseable responses degrade to an empty rationale; transport failures
// after retries throw TransportError.
LlmRationaleResponse consult_llm(const LlmClientConfig& config, const Sample& sample);

// The rendered chat request body, exposed for tests of the wire format.
std::string render_llm_request(const LlmClientConfig& config, const Sample& sample);

}  // namespace xmutest
