#include "xmutest/fusion.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <thread>
#include <unordered_map>

#include <unicode/unistr.h>

#include "xmutest/errors.hpp"
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace xmutest {

using nlohmann::json;

std::set<int> fuse(const std::set<int>& e_x, const std::set<int>& e_llm) {
    std::set<int> out = e_x;
    out.insert(e_llm.begin(), e_llm.end());
    return out;
}

double jaccard_agreement(const std::set<int>& e_x, const std::set<int>& e_llm) {
    std::set<int> uni = fuse(e_x, e_llm);
    if (uni.empty()) return 1.0;
    std::size_t inter = 0;
    for (int i : e_x)
        if (e_llm.count(i)) ++inter;
    return static_cast<double>(inter) / static_cast<double>(uni.size());
}

ExplanationSets make_explanation_sets(const std::set<int>& e_x, const std::set<int>& e_llm) {
    ExplanationSets sets;
    sets.e_x = e_x;
    sets.e_llm = e_llm;
    sets.e_final = fuse(e_x, e_llm);
    sets.agreement = jaccard_agreement(e_x, e_llm);
    return sets;
}

namespace {

std::string fold(const std::string& word) {
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(nfc_normalize(word));
    u.toLower();
    std::string out;
    u.toUTF8String(out);
    return out;
}

}  // namespace

std::set<int> resolve_words(const std::vector<std::string>& words, const TokenSequence& tokens,
                            std::vector<std::string>* unresolved) {
    std::unordered_map<std::string, std::vector<int>> positions;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        positions[fold(tokens[i])].push_back(static_cast<int>(i));
    std::set<int> resolved;
    for (const auto& w : words) {
        auto it = positions.find(fold(w));
        if (it == positions.end()) {
            if (unresolved) unresolved->push_back(w);
        } else {
            resolved.insert(it->second.begin(), it->second.end());
        }
    }
    return resolved;
}

std::string render_llm_request(const LlmClientConfig& config, const Sample& sample) {
    json body;
    body["model"] = config.model;
    body["messages"] = json::array({
        {{"role", "system"},
         {"content", "You identify hateful language. Reply with a JSON array of the exact words "
                     "from the text that make it hateful. Reply with [] if none do."}},
        {{"role", "user"}, {"content", sample.raw_text}},
    });
    body["temperature"] = 0;
    return body.dump();
}

namespace {

std::vector<std::string> parse_word_array(const std::string& content) {
    json arr = json::parse(content);
    if (!arr.is_array()) throw ParseError("LLM reply content is not a JSON array");
    std::vector<std::string> words;
    for (const auto& w : arr) {
        if (!w.is_string()) throw ParseError("LLM reply array holds a non-string");
        words.push_back(w.get<std::string>());
    }
    return words;
}

std::vector<std::string> fixture_words(const std::string& fixture_path, const std::string& sample_id) {
    std::ifstream in(fixture_path);
    if (!in) throw IoError("cannot open LLM fixture: " + fixture_path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("LLM fixture parse error: ") + e.what());
    }
    std::vector<std::string> words;
    if (j.contains(sample_id))
        for (const auto& w : j[sample_id]) words.push_back(w.get<std::string>());
    return words;
}

std::vector<std::string> endpoint_words(const LlmClientConfig& config, const Sample& sample) {
    // split "http://host:port/path"
    std::string url = config.endpoint;
    std::string path = "/v1/chat/completions";
    std::string hostport = url;
    auto scheme_end = url.find("://");
    if (scheme_end != std::string::npos) hostport = url.substr(scheme_end + 3);
    auto slash = hostport.find('/');
    if (slash != std::string::npos) {
        path = hostport.substr(slash);
        hostport = hostport.substr(0, slash);
    }
    std::string base = (scheme_end != std::string::npos ? url.substr(0, scheme_end + 3) : "http://") + hostport;

    const std::string body = render_llm_request(config, sample);
    std::string last_error;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(100 << (attempt - 1)));
        httplib::Client client(base);
        const auto secs = static_cast<time_t>(config.timeout_seconds);
        const auto usecs = static_cast<time_t>((config.timeout_seconds - static_cast<double>(secs)) * 1e6);
        client.set_read_timeout(secs, usecs);
        client.set_connection_timeout(secs, usecs);
        httplib::Headers headers;
        if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        try {
            json reply = json::parse(res->body);
            std::string content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            return parse_word_array(content);
        } catch (const std::exception& e) {
            // degraded: treat an unparseable reply as "no hateful words"
            std::cerr << "warning: sample '" << sample.id << "': unparseable LLM reply (" << e.what()
                      << "); using empty rationale\n";
            return {};
        }
    }
    throw TransportError("LLM endpoint unreachable after " + std::to_string(config.max_retries + 1) +
                         " attempts: " + last_error);
}

}  // namespace

LlmRationaleResponse consult_llm(const LlmClientConfig& config, const Sample& sample) {
    const bool has_fixture = !config.fixture_path.empty();
    const bool has_endpoint = !config.endpoint.empty();
    if (has_fixture == has_endpoint)
        throw ArgumentError("LLM config must set exactly one of endpoint or fixture_path");

    LlmRationaleResponse resp;
    resp.raw_words = has_fixture ? fixture_words(config.fixture_path, sample.id)
                                 : endpoint_words(config, sample);
    resp.resolved = resolve_words(resp.raw_words, sample.tokens, &resp.unresolved);
    return resp;
}

}  // namespace xmutest
