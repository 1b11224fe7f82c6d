// Command-line front end for the X-MuTeST pipeline: corpus ingestion,
// agreement reporting, two-stage training, n-gram explanation, LLM fusion,
// metric evaluation, alpha sweeps and stage ablations.
//
// Phases communicate through files (checkpoint JSON, JSONL, CSV) so each can
// be run, cached and tested on its own.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "xmutest/agreement.hpp"
#include "xmutest/corpus.hpp"
#include "xmutest/errors.hpp"
#include "xmutest/evalmetrics.hpp"
#include "xmutest/fusion.hpp"
#include "xmutest/predictor.hpp"
#include "xmutest/trainer.hpp"
#include "xmutest/util.hpp"
#include "xmutest/xngram.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xmutest;

namespace {

// exit-code contract
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitCheckpoint = 4;
constexpr int kExitTransport = 5;
constexpr int kExitHashMismatch = 6;

struct CliExit {
    int code;
    std::string message;
};

struct RunConfig {
    std::string corpus_path;
    std::string language = "other";
    std::uint64_t seed = 0;
    double test_fraction = 0.15;
    int dim = ReferenceAttentionClassifier::kDefaultDim;
    TrainingConfig training;
    NgramWeights weights;
    LlmClientConfig llm;
    std::string outdir = "out";
    std::string mask_token = kMaskSurface;
    int jobs = 0;  // 0 = library default
};

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliExit{kExitConfig, "cannot open config file: " + path};
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw CliExit{kExitConfig, path + ":" + std::to_string(line_no) + ": expected key = value"};
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    for (const auto& [key, value] : parse_config_file(path)) {
        try {
            if (key == "corpus") cfg.corpus_path = value;
            else if (key == "language") cfg.language = value;
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "test_fraction") cfg.test_fraction = std::stod(value);
            else if (key == "dim") cfg.dim = std::stoi(value);
            else if (key == "alpha_stage1") cfg.training.alpha_stage1 = std::stod(value);
            else if (key == "alpha_stage2") cfg.training.alpha_stage2 = std::stod(value);
            else if (key == "epochs_stage1") cfg.training.epochs_stage1 = std::stoi(value);
            else if (key == "epochs_stage2") cfg.training.epochs_stage2 = std::stoi(value);
            else if (key == "learning_rate") cfg.training.learning_rate = std::stod(value);
            else if (key == "w1") cfg.weights.w1 = std::stod(value);
            else if (key == "w2") cfg.weights.w2 = std::stod(value);
            else if (key == "w3") cfg.weights.w3 = std::stod(value);
            else if (key == "llm_endpoint") cfg.llm.endpoint = value;
            else if (key == "llm_model") cfg.llm.model = value;
            else if (key == "llm_fixture") cfg.llm.fixture_path = value;
            else if (key == "llm_timeout") cfg.llm.timeout_seconds = std::stod(value);
            else if (key == "llm_retries") cfg.llm.max_retries = std::stoi(value);
            else if (key == "outdir") cfg.outdir = value;
            else if (key == "mask_token") cfg.mask_token = value;
            else if (key == "jobs") cfg.jobs = std::stoi(value);
            else throw CliExit{kExitConfig, "unknown config key: " + key};
        } catch (const std::invalid_argument&) {
            throw CliExit{kExitConfig, "bad value for config key '" + key + "': " + value};
        }
    }
}

void finalize_config(RunConfig& cfg) {
    cfg.training.seed = cfg.seed;
    cfg.training.ngram_weights = cfg.weights;
    // LLM credentials come from the environment only
    if (const char* key = std::getenv("XMUTEST_LLM_API_KEY")) cfg.llm.api_key = key;
#ifdef _OPENMP
    if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
#endif
}

std::uint64_t file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliExit{kExitData, "cannot open file for hashing: " + path};
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a64(ss.str());
}

std::string hash_string(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json config_snapshot(const RunConfig& cfg) {
    return {
        {"corpus", cfg.corpus_path},
        {"language", cfg.language},
        {"seed", cfg.seed},
        {"test_fraction", cfg.test_fraction},
        {"dim", cfg.dim},
        {"alpha_stage1", cfg.training.alpha_stage1},
        {"alpha_stage2", cfg.training.alpha_stage2},
        {"epochs_stage1", cfg.training.epochs_stage1},
        {"epochs_stage2", cfg.training.epochs_stage2},
        {"learning_rate", cfg.training.learning_rate},
        {"ngram_weights", {cfg.weights.w1, cfg.weights.w2, cfg.weights.w3}},
        {"mask_token", cfg.mask_token},
    };
}

class ManifestWriter {
public:
    ManifestWriter(const RunConfig& cfg, const std::string& command)
        : path_(fs::path(cfg.outdir) / ("manifest_" + command + ".json")), start_(std::chrono::steady_clock::now()) {
        fs::create_directories(cfg.outdir);
        manifest_["command"] = command;
        manifest_["config"] = config_snapshot(cfg);
        manifest_["inputs"] = json::object();
        manifest_["artifacts"] = json::array();
    }
    void input(const std::string& name, const std::string& path) {
        manifest_["inputs"][name] = {{"path", path}, {"fnv1a64", hash_string(file_hash(path))}};
    }
    void artifact(const fs::path& path) { manifest_["artifacts"].push_back(path.string()); }
    void extra(const std::string& key, json value) { manifest_[key] = std::move(value); }
    void commit() {
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        manifest_["wall_seconds"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() / 1000.0;
        std::ofstream(path_) << manifest_.dump(1) << "\n";
    }

private:
    fs::path path_;
    json manifest_;
    std::chrono::steady_clock::time_point start_;
};

// marker for interrupted runs so partial artifacts are recognizable
struct FailureMarker {
    explicit FailureMarker(std::string outdir) : outdir_(std::move(outdir)) {
        fs::create_directories(outdir_);
        std::ofstream(fs::path(outdir_) / "FAILED") << "run in progress\n";
    }
    void note(const std::string& msg) { std::ofstream(fs::path(outdir_) / "FAILED") << msg << "\n"; }
    void clear() { fs::remove(fs::path(outdir_) / "FAILED"); }

private:
    std::string outdir_;
};

Corpus load_corpus_or_exit(const RunConfig& cfg) {
    if (cfg.corpus_path.empty()) throw CliExit{kExitConfig, "no corpus path configured"};
    try {
        return load_corpus(cfg.corpus_path, language_from_name(cfg.language));
    } catch (const std::exception& e) {
        throw CliExit{kExitData, std::string("corpus load failed: ") + e.what()};
    }
}

ReferenceAttentionClassifier load_checkpoint_or_exit(const std::string& path) {
    try {
        return ReferenceAttentionClassifier::load(path);
    } catch (const std::exception& e) {
        throw CliExit{kExitCheckpoint, std::string("checkpoint load failed: ") + e.what()};
    }
}

std::set<int> gold_index_set(const Sample& s) {
    std::set<int> gold;
    if (s.gold_rationale)
        for (std::size_t t = 0; t < s.gold_rationale->size(); ++t)
            if ((*s.gold_rationale)[t]) gold.insert(static_cast<int>(t));
    return gold;
}

// ---------------------------------------------------------------- ingest ---

int cmd_ingest(const RunConfig& cfg) {
    Corpus corpus = load_corpus_or_exit(cfg);
    int n_hate = 0, n_gold = 0, n_annotated = 0;
    std::size_t n_tokens = 0;
    for (const auto& s : corpus.samples) {
        if (s.label == Label::HATE) ++n_hate;
        if (s.gold_rationale) ++n_gold;
        if (!s.annotator_rationales.empty()) ++n_annotated;
        n_tokens += s.tokens.size();
    }
    json summary = {
        {"path", cfg.corpus_path},
        {"language", language_name(corpus.language)},
        {"n_samples", corpus.samples.size()},
        {"n_hate", n_hate},
        {"n_not_hate", corpus.samples.size() - n_hate},
        {"n_tokens", n_tokens},
        {"n_with_gold_rationale", n_gold},
        {"n_with_annotator_rationales", n_annotated},
        {"corpus_hash", hash_string(file_hash(cfg.corpus_path))},
    };
    std::cout << summary.dump(1) << "\n";
    return 0;
}

// ----------------------------------------------------------------- agree ---

int cmd_agree(const RunConfig& cfg, bool per_sample) {
    Corpus corpus = load_corpus_or_exit(cfg);

    // flatten per-annotator token streams
    std::vector<std::vector<int>> streams;
    for (const auto& s : corpus.samples) {
        if (s.annotator_rationales.empty()) continue;
        if (streams.empty()) streams.resize(s.annotator_rationales.size());
        if (s.annotator_rationales.size() != streams.size())
            throw CliExit{kExitData, "sample '" + s.id + "': inconsistent annotator count"};
        for (std::size_t a = 0; a < streams.size(); ++a)
            for (auto b : s.annotator_rationales[a]) streams[a].push_back(b);
    }
    if (streams.size() < 2) throw CliExit{kExitData, "corpus has no multi-annotator rationales"};

    json report;
    report["unit"] = "token";  // token-level agreement over flattened rationale bits
    report["scale"] = "x100";
    json pairwise = json::object();
    for (std::size_t a = 0; a < streams.size(); ++a)
        for (std::size_t b = a + 1; b < streams.size(); ++b) {
            const std::string name = "A" + std::to_string(a + 1) + "-A" + std::to_string(b + 1);
            pairwise[name] = 100.0 * cohen_kappa(streams[a], streams[b]);
        }
    report["cohen_pairwise"] = pairwise;
    report["fleiss_overall"] = 100.0 * fleiss_kappa(rationale_annotation_matrix(corpus));
    if (per_sample) {
        json per = json::object();
        for (const auto& s : corpus.samples) {
            if (s.annotator_rationales.size() < 2) continue;
            json entry = json::object();
            for (std::size_t a = 0; a < s.annotator_rationales.size(); ++a)
                for (std::size_t b = a + 1; b < s.annotator_rationales.size(); ++b) {
                    std::vector<int> ra(s.annotator_rationales[a].begin(), s.annotator_rationales[a].end());
                    std::vector<int> rb(s.annotator_rationales[b].begin(), s.annotator_rationales[b].end());
                    const std::string name = "A" + std::to_string(a + 1) + "-A" + std::to_string(b + 1);
                    try {
                        entry[name] = 100.0 * cohen_kappa(ra, rb);
                    } catch (const UndefinedStatisticError&) {
                        entry[name] = nullptr;
                    }
                }
            per[s.id] = entry;
        }
        report["cohen_per_sample"] = per;
    }
    std::cout << report.dump(1) << "\n";
    return 0;
}

// ----------------------------------------------------------------- train ---

int cmd_train(const RunConfig& cfg) {
    FailureMarker marker(cfg.outdir);
    ManifestWriter manifest(cfg, "train");
    Corpus corpus = load_corpus_or_exit(cfg);
    manifest.input("corpus", cfg.corpus_path);

    auto [train, test] = split_corpus(corpus, cfg.test_fraction, cfg.seed);
    if (train.samples.empty()) throw CliExit{kExitData, "train split is empty"};

    auto vocab = Vocabulary::build(train);
    ReferenceAttentionClassifier model(vocab, cfg.dim, cfg.seed);
    auto trace1 = stage1_train(model, train, cfg.training);
    auto trace2 = stage2_train(model, train, cfg.training);

    const fs::path ckpt = fs::path(cfg.outdir) / "checkpoint.json";
    model.save(ckpt.string());
    manifest.artifact(ckpt);

    const fs::path trace_path = fs::path(cfg.outdir) / "trace.csv";
    {
        std::ofstream trace(trace_path);
        trace << "epoch,stage,mean_l_att,mean_l_cl,mean_l_total,train_accuracy\n";
        auto emit = [&trace](const std::vector<EpochStats>& stats) {
            for (const auto& e : stats)
                trace << e.epoch << "," << e.stage << "," << e.mean_att << "," << e.mean_cl << ","
                      << e.mean_total << "," << e.train_accuracy << "\n";
        };
        emit(trace1);
        emit(trace2);
    }
    manifest.artifact(trace_path);
    manifest.extra("checkpoint_hash", hash_string(model.content_hash()));
    manifest.extra("split", json{{"train", train.samples.size()}, {"test", test.samples.size()}});
    manifest.commit();
    marker.clear();
    std::cout << "checkpoint: " << ckpt.string() << " (hash " << hash_string(model.content_hash())
              << ")\n";
    return 0;
}

// --------------------------------------------------------------- explain ---

json explanation_line(const std::string& id, const ExplanationScores& scores) {
    const int k = stage2_k(static_cast<int>(scores.normalized.size()));
    json line = {
        {"id", id},
        {"predicted_class", label_name(scores.reference_class)},
        {"p_orig", scores.p_orig},
        {"E", scores.raw},
        {"E_norm", scores.normalized},
        {"top_tokens", top_tokens(scores, k)},
    };
    return line;
}

int cmd_explain(const RunConfig& cfg, const std::string& checkpoint_path, bool use_stub) {
    FailureMarker marker(cfg.outdir);
    ManifestWriter manifest(cfg, "explain");
    Corpus corpus = load_corpus_or_exit(cfg);
    manifest.input("corpus", cfg.corpus_path);

    auto [train, test] = split_corpus(corpus, cfg.test_fraction, cfg.seed);

    std::unique_ptr<Predictor> predictor;
    if (use_stub) {
        // deterministic stand-in for golden tests: class probability derived
        // from a content hash of the token sequence
        struct HashStub : Predictor {
            ProbDist predict(const TokenSequence& seq) const override {
                const double u = static_cast<double>(fnv1a64(StubPredictor::key(seq)) >> 11) * 0x1.0p-53;
                return {u, 1.0 - u};
            }
        };
        predictor = std::make_unique<HashStub>();
    } else {
        predictor = std::make_unique<ReferenceAttentionClassifier>(load_checkpoint_or_exit(checkpoint_path));
        manifest.input("checkpoint", checkpoint_path);
    }

    const fs::path out_path = fs::path(cfg.outdir) / "explanations.jsonl";
    std::vector<json> lines(test.samples.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < test.samples.size(); ++i) {
        const Sample& s = test.samples[i];
        if (s.tokens.empty()) continue;
        lines[i] = explanation_line(s.id, token_scores(*predictor, s.tokens, cfg.weights, false));
    }
    std::ofstream out(out_path);
    for (const auto& line : lines)
        if (!line.is_null()) out << line.dump() << "\n";
    out.close();
    manifest.artifact(out_path);
    manifest.commit();

    // sidecar consumed by `eval` for its input-consistency check
    json sidecar = {{"corpus_hash", hash_string(file_hash(cfg.corpus_path))},
                    {"seed", cfg.seed},
                    {"test_fraction", cfg.test_fraction}};
    std::ofstream(out_path.string() + ".manifest.json") << sidecar.dump(1) << "\n";
    marker.clear();
    std::cout << "explanations: " << out_path.string() << " (" << test.samples.size() << " samples)\n";
    return 0;
}

// ------------------------------------------------------------------ fuse ---

int cmd_fuse(RunConfig cfg, const std::string& explanations_path) {
    FailureMarker marker(cfg.outdir);
    ManifestWriter manifest(cfg, "fuse");
    Corpus corpus = load_corpus_or_exit(cfg);
    manifest.input("corpus", cfg.corpus_path);
    manifest.input("explanations", explanations_path);

    std::map<std::string, const Sample*> by_id;
    for (const auto& s : corpus.samples) by_id[s.id] = &s;

    // known fixture ids, for the missing-id warning
    std::set<std::string> fixture_ids;
    const bool fixture_mode = !cfg.llm.fixture_path.empty();
    if (fixture_mode) {
        std::ifstream fin(cfg.llm.fixture_path);
        if (!fin) throw CliExit{kExitData, "cannot open LLM fixture: " + cfg.llm.fixture_path};
        json fj;
        fin >> fj;
        for (auto it = fj.begin(); it != fj.end(); ++it) fixture_ids.insert(it.key());
    }

    std::ifstream in(explanations_path);
    if (!in) throw CliExit{kExitData, "cannot open explanations file: " + explanations_path};
    const fs::path out_path = fs::path(cfg.outdir) / "fused.jsonl";
    std::ofstream out(out_path);
    std::string line;
    double agreement_sum = 0.0;
    std::size_t n = 0, line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json exp;
        try {
            exp = json::parse(line);
        } catch (const json::parse_error& e) {
            throw CliExit{kExitData, explanations_path + ":" + std::to_string(line_no) + ": " + e.what()};
        }
        const std::string id = exp.at("id").get<std::string>();
        auto sample_it = by_id.find(id);
        if (sample_it == by_id.end())
            throw CliExit{kExitData, "explanations refer to unknown sample id '" + id + "'"};

        std::set<int> e_x;
        for (int t : exp.at("top_tokens")) e_x.insert(t);

        std::set<int> e_llm;
        if (fixture_mode && !fixture_ids.count(id)) {
            std::cerr << "warning: fixture has no entry for sample '" << id << "'; using empty e_llm\n";
        } else {
            try {
                e_llm = consult_llm(cfg.llm, *sample_it->second).resolved;
            } catch (const TransportError& e) {
                throw CliExit{kExitTransport, e.what()};
            }
        }
        const auto sets = make_explanation_sets(e_x, e_llm);
        json fused = {{"id", id},
                      {"e_x", std::vector<int>(sets.e_x.begin(), sets.e_x.end())},
                      {"e_llm", std::vector<int>(sets.e_llm.begin(), sets.e_llm.end())},
                      {"e_final", std::vector<int>(sets.e_final.begin(), sets.e_final.end())},
                      {"agreement", sets.agreement}};
        out << fused.dump() << "\n";
        agreement_sum += sets.agreement;
        ++n;
    }
    out.close();
    manifest.artifact(out_path);
    manifest.extra("mean_agreement", n ? agreement_sum / n : 1.0);
    manifest.commit();
    marker.clear();
    std::cout << "fused: " << out_path.string() << "\nmean agreement: " << (n ? agreement_sum / n : 1.0)
              << " over " << n << " samples\n";
    return 0;
}

// ------------------------------------------------------------------ eval ---

struct ExplanationLine {
    std::vector<int> top_tokens;
    std::vector<double> e_norm;
};

std::map<std::string, ExplanationLine> read_explanations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliExit{kExitData, "cannot open explanations file: " + path};
    std::map<std::string, ExplanationLine> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw CliExit{kExitData, path + ":" + std::to_string(line_no) + ": " + e.what()};
        }
        ExplanationLine e;
        for (int t : j.at("top_tokens")) e.top_tokens.push_back(t);
        for (double v : j.at("E_norm")) e.e_norm.push_back(v);
        out[j.at("id").get<std::string>()] = std::move(e);
    }
    return out;
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path,
             const std::string& explanations_path, const std::string& fused_path) {
    FailureMarker marker(cfg.outdir);
    ManifestWriter manifest(cfg, "eval");
    Corpus corpus = load_corpus_or_exit(cfg);
    manifest.input("corpus", cfg.corpus_path);
    manifest.input("explanations", explanations_path);

    // input-consistency gate: the explanations must come from this corpus
    const std::string sidecar_path = explanations_path + ".manifest.json";
    if (std::ifstream sidecar{sidecar_path}) {
        json meta;
        sidecar >> meta;
        const std::string expected = meta.value("corpus_hash", "");
        const std::string actual = hash_string(file_hash(cfg.corpus_path));
        if (!expected.empty() && expected != actual)
            throw CliExit{kExitHashMismatch, "corpus hash mismatch: explanations were computed on " +
                                                 expected + ", current corpus is " + actual};
    } else {
        std::cerr << "warning: no sidecar manifest at " << sidecar_path
                  << "; skipping corpus-hash check\n";
    }

    auto model = load_checkpoint_or_exit(checkpoint_path);
    manifest.input("checkpoint", checkpoint_path);
    auto [train, test] = split_corpus(corpus, cfg.test_fraction, cfg.seed);
    auto explanations = read_explanations(explanations_path);

    // optional fused file overrides the plausibility sets with e_final
    std::map<std::string, std::set<int>> fused_sets;
    if (!fused_path.empty()) {
        std::ifstream in(fused_path);
        if (!in) throw CliExit{kExitData, "cannot open fused file: " + fused_path};
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line);
            std::set<int> e_final;
            for (int t : j.at("e_final")) e_final.insert(t);
            fused_sets[j.at("id").get<std::string>()] = std::move(e_final);
        }
        manifest.input("fused", fused_path);
    }

    std::vector<EvalInput> inputs;
    for (const auto& s : test.samples) {
        if (s.tokens.empty()) continue;
        auto it = explanations.find(s.id);
        if (it == explanations.end())
            throw CliExit{kExitData, "no explanation line for test sample '" + s.id + "'"};
        EvalInput in;
        in.sample = &s;
        in.plausibility_pred.insert(it->second.top_tokens.begin(), it->second.top_tokens.end());
        if (!fused_path.empty()) {
            auto fit = fused_sets.find(s.id);
            if (fit != fused_sets.end()) in.plausibility_pred = fit->second;
        }
        // faithfulness uses the top-5 scored tokens
        ExplanationScores scores;
        scores.normalized = it->second.e_norm;
        const int k5 = std::min<int>(5, static_cast<int>(s.tokens.size()));
        for (int t : top_tokens(scores, k5)) in.faithfulness_pred.insert(t);
        inputs.push_back(std::move(in));
    }

    const auto report = evaluate(model, inputs, cfg.mask_token);
    json report_json = {
        {"accuracy", report.accuracy},
        {"f1_hate", report.f1_hate},
        {"macro_f1", report.macro_f1},
        {"token_f1", report.token_f1},
        {"iou_f1", report.iou_f1},
        {"comprehensiveness", report.comprehensiveness},
        {"sufficiency", report.sufficiency},
        {"n_classified", report.n_classified},
        {"n_plausibility", report.n_plausibility},
        {"n_faithfulness", report.n_faithfulness},
    };
    const fs::path report_path = fs::path(cfg.outdir) / "report.json";
    std::ofstream(report_path) << report_json.dump(1) << "\n";
    manifest.artifact(report_path);
    manifest.commit();
    marker.clear();
    std::cout << format_report_table(report);
    std::cout << "report: " << report_path.string() << "\n";
    return 0;
}

// ----------------------------------------------------------- alpha sweep ---

double test_accuracy(const ReferenceAttentionClassifier& model, const Corpus& test) {
    int ok = 0, n = 0;
    for (const auto& s : test.samples) {
        if (s.tokens.empty()) continue;
        const auto p = model.predict(s.tokens);
        ok += (p.p_not_hate > p.p_hate ? Label::NOT_HATE : Label::HATE) == s.label;
        ++n;
    }
    return n ? static_cast<double>(ok) / n : 0.0;
}

int cmd_alpha_sweep(const RunConfig& cfg, std::vector<double> alphas) {
    if (alphas.empty()) throw CliExit{kExitConfig, "alpha-sweep needs at least one alpha"};
    for (double a : alphas)
        if (a < 0.0 || a > 1.0) throw CliExit{kExitConfig, "alpha out of [0,1]"};

    FailureMarker marker(cfg.outdir);
    ManifestWriter manifest(cfg, "alpha_sweep");
    Corpus corpus = load_corpus_or_exit(cfg);
    manifest.input("corpus", cfg.corpus_path);
    auto [train, test] = split_corpus(corpus, cfg.test_fraction, cfg.seed);
    if (train.samples.empty()) throw CliExit{kExitData, "train split is empty"};

    auto vocab = Vocabulary::build(train);
    ReferenceAttentionClassifier stage1(vocab, cfg.dim, cfg.seed);
    stage1_train(stage1, train, cfg.training);

    const fs::path csv_path = fs::path(cfg.outdir) / "alpha_sweep.csv";
    std::ofstream csv(csv_path);
    csv << "alpha,accuracy,f1,macro_f1\n";
    for (double alpha : alphas) {
        ReferenceAttentionClassifier model = stage1;  // restart stage-2 from the shared checkpoint
        TrainingConfig tc = cfg.training;
        tc.alpha_stage2 = alpha;
        stage2_train(model, train, tc);
        std::vector<Label> preds, golds;
        for (const auto& s : test.samples) {
            if (s.tokens.empty()) continue;
            const auto p = model.predict(s.tokens);
            preds.push_back(p.p_not_hate > p.p_hate ? Label::NOT_HATE : Label::HATE);
            golds.push_back(s.label);
        }
        const auto m = classification_metrics(preds, golds);
        csv << alpha << "," << m.accuracy << "," << m.f1_hate << "," << m.macro_f1 << "\n";
    }
    csv.close();
    manifest.artifact(csv_path);
    manifest.commit();
    marker.clear();
    std::cout << "sweep: " << csv_path.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- ablate ---

MetricReport attention_based_report(const ReferenceAttentionClassifier& model, const Corpus& test,
                                    const std::string& mask_token) {
    std::vector<EvalInput> inputs;
    for (const auto& s : test.samples) {
        if (s.tokens.empty()) continue;
        EvalInput in;
        in.sample = &s;
        ExplanationScores att;
        att.normalized = model.attention(s.tokens).weights;
        const int L = static_cast<int>(s.tokens.size());
        for (int t : top_tokens(att, stage2_k(L))) in.plausibility_pred.insert(t);
        for (int t : top_tokens(att, std::min(5, L))) in.faithfulness_pred.insert(t);
        inputs.push_back(std::move(in));
    }
    return evaluate(model, inputs, mask_token);
}

int cmd_ablate(const RunConfig& cfg) {
    FailureMarker marker(cfg.outdir);
    ManifestWriter manifest(cfg, "ablate");
    Corpus corpus = load_corpus_or_exit(cfg);
    manifest.input("corpus", cfg.corpus_path);
    auto [train, test] = split_corpus(corpus, cfg.test_fraction, cfg.seed);
    if (train.samples.empty()) throw CliExit{kExitData, "train split is empty"};
    auto vocab = Vocabulary::build(train);

    // arms differ only in whether each stage's attention term is active;
    // epoch counts stay identical so the comparison is compute-matched
    struct Arm {
        const char* name;
        bool stage1_attention;
        bool stage2_attention;
    };
    const Arm arms[] = {{"both_stages", true, true},
                        {"stage1_only", true, false},
                        {"stage2_only", false, true},
                        {"neither", false, false}};
    json reports = json::object();
    for (const Arm& arm : arms) {
        TrainingConfig tc = cfg.training;
        if (!arm.stage1_attention) tc.alpha_stage1 = 0.0;
        if (!arm.stage2_attention) tc.alpha_stage2 = 0.0;
        ReferenceAttentionClassifier model(vocab, cfg.dim, cfg.seed);
        stage1_train(model, train, tc);
        stage2_train(model, train, tc);
        const auto r = attention_based_report(model, test, cfg.mask_token);
        reports[arm.name] = {
            {"accuracy", r.accuracy},         {"f1_hate", r.f1_hate},
            {"macro_f1", r.macro_f1},         {"token_f1", r.token_f1},
            {"iou_f1", r.iou_f1},             {"comprehensiveness", r.comprehensiveness},
            {"sufficiency", r.sufficiency},   {"n_classified", r.n_classified},
            {"n_plausibility", r.n_plausibility}, {"n_faithfulness", r.n_faithfulness},
        };
        manifest.extra(std::string("arm_") + arm.name, "completed");
    }
    const fs::path path = fs::path(cfg.outdir) / "ablation.json";
    std::ofstream(path) << reports.dump(1) << "\n";
    manifest.artifact(path);
    manifest.commit();
    marker.clear();
    std::cout << reports.dump(1) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"X-MuTeST explainable hate speech detection pipeline"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    std::string checkpoint_path;
    std::string explanations_path;
    std::string fused_path;
    std::vector<double> alphas;
    bool per_sample = false;
    bool use_stub = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key = value config file");
        sub->add_option("--corpus", cfg.corpus_path, "JSONL corpus path");
        sub->add_option("--language", cfg.language, "telugu|hindi|english|other");
        sub->add_option("--seed", cfg.seed, "run seed");
        sub->add_option("--test-fraction", cfg.test_fraction, "held-out fraction");
        sub->add_option("--outdir", cfg.outdir, "output directory");
        sub->add_option("--jobs", cfg.jobs, "max worker threads (0 = default)");
        sub->add_option("--dim", cfg.dim, "embedding dimension");
        sub->add_option("--alpha-stage1", cfg.training.alpha_stage1);
        sub->add_option("--alpha-stage2", cfg.training.alpha_stage2);
        sub->add_option("--epochs-stage1", cfg.training.epochs_stage1);
        sub->add_option("--epochs-stage2", cfg.training.epochs_stage2);
        sub->add_option("--learning-rate", cfg.training.learning_rate);
        sub->add_option("--mask-token", cfg.mask_token);
        sub->add_option("--llm-endpoint", cfg.llm.endpoint);
        sub->add_option("--llm-fixture", cfg.llm.fixture_path);
        sub->add_option("--llm-model", cfg.llm.model);
    };

    auto* ingest = app.add_subcommand("ingest", "load and validate a corpus, print a summary");
    add_common(ingest);
    auto* agree = app.add_subcommand("agree", "inter-annotator agreement report");
    add_common(agree);
    agree->add_flag("--per-sample", per_sample, "include per-sample Cohen kappas");
    auto* train = app.add_subcommand("train", "two-stage training run");
    add_common(train);
    auto* explain = app.add_subcommand("explain", "n-gram explanations for the test split");
    add_common(explain);
    explain->add_option("--checkpoint", checkpoint_path, "model checkpoint");
    explain->add_flag("--stub-predictor", use_stub, "deterministic stub instead of a checkpoint");
    auto* fuse_cmd = app.add_subcommand("fuse", "union explanations with LLM rationales");
    add_common(fuse_cmd);
    fuse_cmd->add_option("--explanations", explanations_path, "explanations JSONL")->required();
    auto* eval = app.add_subcommand("eval", "classification + explainability metric report");
    add_common(eval);
    eval->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
    eval->add_option("--explanations", explanations_path, "explanations JSONL")->required();
    eval->add_option("--fused", fused_path, "fused JSONL (optional, overrides plausibility sets)");
    auto* sweep = app.add_subcommand("alpha-sweep", "stage-2 alpha sweep from a shared stage-1 model");
    add_common(sweep);
    sweep->add_option("--alphas", alphas, "alpha values")->required();
    auto* ablate = app.add_subcommand("ablate", "stage ablation: both / stage-1 / stage-2 / neither");
    add_common(ablate);

    CLI11_PARSE(app, argc, argv);

    try {
        // precedence: defaults < config file < flags. Flags were already parsed
        // into cfg, so re-apply them after the file by re-parsing.
        if (!config_path.empty()) {
            RunConfig file_cfg;
            apply_config_file(file_cfg, config_path);
            RunConfig flag_cfg = cfg;
            cfg = file_cfg;
            // flags win where they were actually given
            for (auto* sub : app.get_subcommands()) {
                auto overridden = [&](const std::string& name) {
                    auto* opt = sub->get_option_no_throw(name);
                    return opt && opt->count() > 0;
                };
                if (overridden("--corpus")) cfg.corpus_path = flag_cfg.corpus_path;
                if (overridden("--language")) cfg.language = flag_cfg.language;
                if (overridden("--seed")) cfg.seed = flag_cfg.seed;
                if (overridden("--test-fraction")) cfg.test_fraction = flag_cfg.test_fraction;
                if (overridden("--outdir")) cfg.outdir = flag_cfg.outdir;
                if (overridden("--jobs")) cfg.jobs = flag_cfg.jobs;
                if (overridden("--dim")) cfg.dim = flag_cfg.dim;
                if (overridden("--alpha-stage1")) cfg.training.alpha_stage1 = flag_cfg.training.alpha_stage1;
                if (overridden("--alpha-stage2")) cfg.training.alpha_stage2 = flag_cfg.training.alpha_stage2;
                if (overridden("--epochs-stage1")) cfg.training.epochs_stage1 = flag_cfg.training.epochs_stage1;
                if (overridden("--epochs-stage2")) cfg.training.epochs_stage2 = flag_cfg.training.epochs_stage2;
                if (overridden("--learning-rate")) cfg.training.learning_rate = flag_cfg.training.learning_rate;
                if (overridden("--mask-token")) cfg.mask_token = flag_cfg.mask_token;
                if (overridden("--llm-endpoint")) cfg.llm.endpoint = flag_cfg.llm.endpoint;
                if (overridden("--llm-fixture")) cfg.llm.fixture_path = flag_cfg.llm.fixture_path;
                if (overridden("--llm-model")) cfg.llm.model = flag_cfg.llm.model;
            }
        }
        finalize_config(cfg);

        if (app.got_subcommand(ingest)) return cmd_ingest(cfg);
        if (app.got_subcommand(agree)) return cmd_agree(cfg, per_sample);
        if (app.got_subcommand(train)) return cmd_train(cfg);
        if (app.got_subcommand(explain)) return cmd_explain(cfg, checkpoint_path, use_stub);
        if (app.got_subcommand(fuse_cmd)) return cmd_fuse(cfg, explanations_path);
        if (app.got_subcommand(eval)) return cmd_eval(cfg, checkpoint_path, explanations_path, fused_path);
        if (app.got_subcommand(sweep)) return cmd_alpha_sweep(cfg, alphas);
        if (app.got_subcommand(ablate)) return cmd_ablate(cfg);
    } catch (const CliExit& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const TransportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
