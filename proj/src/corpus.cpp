#include "xmutest/corpus.hpp"

#include <fstream>
#include <sstream>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "xmutest/errors.hpp"
#include "xmutest/util.hpp"
#include <nlohmann/json.hpp>

namespace xmutest {

using nlohmann::json;

Language language_from_name(const std::string& name) {
    if (name == "telugu" || name == "TELUGU") return Language::TELUGU;
    if (name == "hindi" || name == "HINDI") return Language::HINDI;
    if (name == "english" || name == "ENGLISH") return Language::ENGLISH;
    if (name == "other" || name == "OTHER") return Language::OTHER;
    throw ArgumentError("unknown language: " + name);
}

const char* language_name(Language lang) {
    switch (lang) {
        case Language::TELUGU: return "telugu";
        case Language::HINDI: return "hindi";
        case Language::ENGLISH: return "english";
        default: return "other";
    }
}

std::string nfc_normalize(const std::string& utf8) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw IoError("ICU NFC normalizer unavailable");
    icu::UnicodeString in = icu::UnicodeString::fromUTF8(utf8);
    icu::UnicodeString out = nfc->normalize(in, status);
    if (U_FAILURE(status)) throw ParseError("NFC normalization failed");
    std::string result;
    out.toUTF8String(result);
    return result;
}

namespace {

bool is_unicode_whitespace(char32_t cp) {
    switch (cp) {
        case 0x09: case 0x0a: case 0x0b: case 0x0c: case 0x0d: case 0x20:
        case 0x85: case 0xa0: case 0x1680:
        case 0x2000: case 0x2001: case 0x2002: case 0x2003: case 0x2004:
        case 0x2005: case 0x2006: case 0x2007: case 0x2008: case 0x2009:
        case 0x200a: case 0x2028: case 0x2029: case 0x202f: case 0x205f:
        case 0x3000:
            return true;
        default:
            return false;
    }
}

// Decodes one UTF-8 code point starting at i; advances i past it.
char32_t decode_utf8(const std::string& s, std::size_t& i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) { ++i; return c; }
    int extra = (c >= 0xf0) ? 3 : (c >= 0xe0) ? 2 : 1;
    char32_t cp = c & (0x3f >> extra);
    std::size_t j = i + 1;
    for (int k = 0; k < extra && j < s.size(); ++k, ++j) {
        cp = (cp << 6) | (static_cast<unsigned char>(s[j]) & 0x3f);
    }
    i = j;
    return cp;
}

}  // namespace

TokenSequence tokenize(const std::string& raw_text) {
    TokenSequence out;
    std::string current;
    std::size_t i = 0;
    while (i < raw_text.size()) {
        std::size_t start = i;
        char32_t cp = decode_utf8(raw_text, i);
        if (is_unicode_whitespace(cp)) {
            if (!current.empty()) {
                out.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.append(raw_text, start, i - start);
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

namespace {

RationaleVector parse_rationale(const json& arr, std::size_t expected_len, const std::string& sample_id) {
    if (!arr.is_array())
        throw ValidationError("sample '" + sample_id + "': rationale is not an array");
    RationaleVector bits;
    bits.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
            throw ValidationError("sample '" + sample_id + "': rationale entries must be 0 or 1");
        bits.push_back(static_cast<std::uint8_t>(v.get<int>()));
    }
    if (bits.size() != expected_len)
        throw ValidationError("sample '" + sample_id + "': rationale length " +
                              std::to_string(bits.size()) + " != token count " +
                              std::to_string(expected_len));
    return bits;
}

bool all_zero(const RationaleVector& v) {
    for (auto b : v)
        if (b) return false;
    return true;
}

}  // namespace

Corpus load_corpus(const std::string& path, Language language) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path);

    Corpus corpus;
    corpus.language = language;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> seen_ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        Sample s;
        try {
            s.id = obj.at("id").get<std::string>();
            s.raw_text = nfc_normalize(obj.at("text").get<std::string>());
            std::string label = obj.at("label").get<std::string>();
            if (label == "HATE") s.label = Label::HATE;
            else if (label == "NOT_HATE") s.label = Label::NOT_HATE;
            else throw ValidationError("sample '" + s.id + "': bad label '" + label + "'");
        } catch (const json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        s.tokens = tokenize(s.raw_text);
        const std::size_t len = s.tokens.size();
        if (obj.contains("gold_rationale"))
            s.gold_rationale = parse_rationale(obj["gold_rationale"], len, s.id);
        if (obj.contains("rationales")) {
            if (!obj["rationales"].is_array())
                throw ValidationError("sample '" + s.id + "': rationales must be an array of arrays");
            for (const auto& r : obj["rationales"])
                s.annotator_rationales.push_back(parse_rationale(r, len, s.id));
        }
        if (s.label == Label::NOT_HATE) {
            if (s.gold_rationale && !all_zero(*s.gold_rationale))
                throw ValidationError("sample '" + s.id + "': NOT_HATE gold rationale has nonzero bits");
            for (const auto& r : s.annotator_rationales)
                if (!all_zero(r))
                    throw ValidationError("sample '" + s.id + "': NOT_HATE annotator rationale has nonzero bits");
        }
        for (const auto& id : seen_ids)
            if (id == s.id) throw ValidationError("duplicate sample id '" + s.id + "'");
        seen_ids.push_back(s.id);
        corpus.samples.push_back(std::move(s));
    }
    return corpus;
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw ArgumentError("test_fraction must be in [0, 1)");
    const std::size_t n = corpus.samples.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    SplitMix64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = rng.below(i);
        std::swap(order[i - 1], order[j]);
    }
    // round half toward the test set
    const auto test_size = static_cast<std::size_t>(static_cast<double>(n) * test_fraction + 0.5);

    Corpus train, test;
    train.language = test.language = corpus.language;
    for (std::size_t i = 0; i < n; ++i) {
        (i < test_size ? test : train).samples.push_back(corpus.samples[order[i]]);
    }
    return {std::move(train), std::move(test)};
}

}  // namespace xmutest
