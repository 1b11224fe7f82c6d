#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace xmutest {

enum class Label { HATE, NOT_HATE };

inline const char* label_name(Label l) { return l == Label::HATE ? "HATE" : "NOT_HATE"; }

enum class Language { TELUGU, HINDI, ENGLISH, OTHER };

Language language_from_name(const std::string& name);
const char* language_name(Language lang);

// Tokens are whitespace-free surface strings; position in the vector is the
// token index. Rationale vectors are one bit per token.
using TokenSequence = std::vector<std::string>;
using RationaleVector = std::vector<std::uint8_t>;

struct Sample {
    std::string id;
    std::string raw_text;
    TokenSequence tokens;
    Label label = Label::NOT_HATE;
    std::optional<RationaleVector> gold_rationale;
    std::vector<RationaleVector> annotator_rationales;  // up to 3
};

struct Corpus {
    Language language = Language::OTHER;
    std::vector<Sample> samples;
};

// Unicode NFC normalization (ICU-backed). Input must be valid UTF-8.
std::string nfc_normalize(const std::string& utf8);

// Splits on runs of Unicode whitespace; every non-whitespace code point is
// preserved verbatim. Devanagari/Telugu safe since only whitespace is special.
TokenSequence tokenize(const std::string& raw_text);

// Reads one JSON object per line:
//   {"id", "text", "label", "rationales": [[...],...], "gold_rationale": [...]}
// Text is NFC-normalized before tokenization. Rationale lengths are validated
// against the token count; NOT_HATE rationales must be all-zero.
Corpus load_corpus(const std::string& path, Language language = Language::OTHER);

// Deterministic shuffle + split. Test size = round(N * test_fraction), ties
// toward the test set. Returns (train, test).
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double test_fraction, std::uint64_t seed);

}  // namespace xmutest
