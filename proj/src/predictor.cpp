#include "xmutest/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "xmutest/errors.hpp"
#include "xmutest/util.hpp"
#include <nlohmann/json.hpp>

namespace xmutest {

using nlohmann::json;

int Vocabulary::add(const std::string& token) {
    auto it = token_to_id.find(token);
    if (it != token_to_id.end()) return it->second;
    int id = size();
    id_to_token.push_back(token);
    token_to_id.emplace(token, id);
    return id;
}

int Vocabulary::lookup(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? kUnk : it->second;
}

Vocabulary Vocabulary::build(const Corpus& corpus) {
    Vocabulary v;
    for (const auto& s : corpus.samples)
        for (const auto& t : s.tokens) v.add(t);
    return v;
}

ReferenceAttentionClassifier::ReferenceAttentionClassifier(Vocabulary vocab, int dim, std::uint64_t seed)
    : vocab_(std::move(vocab)), dim_(dim), seed_(seed) {
    if (dim <= 0) throw ArgumentError("embedding dim must be positive");
    const std::size_t v = static_cast<std::size_t>(vocab_.size());
    embeddings_.resize(v * dim_);
    cls_.resize(dim_);
    head_w_.resize(2 * static_cast<std::size_t>(dim_));
    head_b_.resize(2);

    // Gaussian init, std 0.02, via Box-Muller over a platform-stable stream.
    SplitMix64 rng(seed);
    auto gauss = [&rng]() {
        double u1 = rng.uniform();
        double u2 = rng.uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    for (auto& x : embeddings_) x = 0.02 * gauss();
    for (auto& x : cls_) x = 0.02 * gauss();
    for (auto& x : head_w_) x = 0.02 * gauss();
    for (auto& x : head_b_) x = 0.0;
}

std::vector<int> ReferenceAttentionClassifier::to_ids(const TokenSequence& seq) const {
    std::vector<int> ids;
    ids.reserve(seq.size());
    for (const auto& t : seq) ids.push_back(vocab_.lookup(t));
    return ids;
}

AttentionProfile ReferenceAttentionClassifier::attention(const TokenSequence& seq) const {
    if (seq.empty()) throw ArgumentError("attention: empty sequence");
    const auto ids = to_ids(seq);
    const std::size_t L = ids.size();
    std::vector<double> scores(L);
    for (std::size_t i = 0; i < L; ++i) {
        const double* h = &embeddings_[static_cast<std::size_t>(ids[i]) * dim_];
        double s = 0.0;
        for (int k = 0; k < dim_; ++k) s += h[k] * cls_[k];
        scores[i] = s;
    }
    const double max_s = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (auto& s : scores) {
        s = std::exp(s - max_s);
        z += s;
    }
    AttentionProfile profile;
    profile.weights.resize(L);
    for (std::size_t i = 0; i < L; ++i) profile.weights[i] = scores[i] / z;
    return profile;
}

ProbDist ReferenceAttentionClassifier::predict(const TokenSequence& seq) const {
    if (seq.empty()) throw ArgumentError("predict: empty sequence");
    const auto ids = to_ids(seq);
    const auto a = attention(seq);
    std::vector<double> pooled(dim_, 0.0);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const double* h = &embeddings_[static_cast<std::size_t>(ids[i]) * dim_];
        for (int k = 0; k < dim_; ++k) pooled[k] += a.weights[i] * h[k];
    }
    double logit_hate = head_b_[0];
    double logit_not = head_b_[1];
    for (int k = 0; k < dim_; ++k) {
        logit_hate += head_w_[k] * pooled[k];
        logit_not += head_w_[dim_ + k] * pooled[k];
    }
    const double m = std::max(logit_hate, logit_not);
    const double eh = std::exp(logit_hate - m);
    const double en = std::exp(logit_not - m);
    return {eh / (eh + en), en / (eh + en)};
}

namespace {

json params_to_json(const std::vector<double>& v) {
    json arr = json::array();
    for (double x : v) arr.push_back(double_to_hex(x));
    return arr;
}

std::vector<double> params_from_json(const json& arr) {
    std::vector<double> v;
    v.reserve(arr.size());
    for (const auto& s : arr) v.push_back(hex_to_double(s.get<std::string>()));
    return v;
}

}  // namespace

void ReferenceAttentionClassifier::save(const std::string& path) const {
    json j;
    j["format"] = "xmutest-checkpoint";
    j["version"] = 1;
    j["dim"] = dim_;
    j["seed"] = seed_;
    j["vocab"] = vocab_.id_to_token;
    j["embeddings"] = params_to_json(embeddings_);
    j["cls"] = params_to_json(cls_);
    j["head_w"] = params_to_json(head_w_);
    j["head_b"] = params_to_json(head_b_);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << j.dump() << "\n";
}

ReferenceAttentionClassifier ReferenceAttentionClassifier::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("checkpoint parse error: ") + e.what());
    }
    if (j.value("format", "") != "xmutest-checkpoint" || j.value("version", 0) != 1)
        throw ValidationError("unrecognized checkpoint format in " + path);

    Vocabulary vocab;
    vocab.id_to_token.clear();
    vocab.token_to_id.clear();
    for (const auto& t : j.at("vocab")) {
        std::string tok = t.get<std::string>();
        vocab.token_to_id.emplace(tok, static_cast<int>(vocab.id_to_token.size()));
        vocab.id_to_token.push_back(std::move(tok));
    }
    ReferenceAttentionClassifier model(std::move(vocab), j.at("dim").get<int>(),
                                       j.at("seed").get<std::uint64_t>());
    model.embeddings_ = params_from_json(j.at("embeddings"));
    model.cls_ = params_from_json(j.at("cls"));
    model.head_w_ = params_from_json(j.at("head_w"));
    model.head_b_ = params_from_json(j.at("head_b"));
    const std::size_t v = static_cast<std::size_t>(model.vocab_.size());
    if (model.embeddings_.size() != v * model.dim_ || model.cls_.size() != static_cast<std::size_t>(model.dim_))
        throw ValidationError("checkpoint parameter shapes inconsistent with vocab/dim");
    return model;
}

std::uint64_t ReferenceAttentionClassifier::content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& t : vocab_.id_to_token) h = fnv1a64(t.data(), t.size(), h);
    auto mix = [&h](const std::vector<double>& v) {
        h = fnv1a64(v.data(), v.size() * sizeof(double), h);
    };
    mix(embeddings_);
    mix(cls_);
    mix(head_w_);
    mix(head_b_);
    return h;
}

std::string StubPredictor::key(const TokenSequence& seq) {
    std::string k;
    for (const auto& t : seq) {
        k += t;
        k += '\x1f';
    }
    return k;
}

ProbDist StubPredictor::predict(const TokenSequence& seq) const {
    auto it = table_.find(key(seq));
    return it == table_.end() ? default_ : it->second;
}

}  // namespace xmutest
