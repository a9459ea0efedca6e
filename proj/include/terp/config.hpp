#pragma once

// Flat "key = value" configuration covering every tunable default of the
// pipeline. Unknown keys are rejected so typos do not silently fall back to
// defaults.

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "terp/error.hpp"
#include "terp/kge.hpp"
#include "terp/knowledge_graph.hpp"
#include "terp/model.hpp"
#include "terp/text_util.hpp"

namespace terp {

struct QaTrainConfig {
    std::size_t epochs = 10;
    double learning_rate = 3e-5;
    std::size_t batch_size = 10;
    std::size_t candidates = 20000;  // N
    std::uint64_t seed = 0;
    bool freeze_embeddings = false;
    bool weighted_loss = false;
    double lambda = 0.6;  // only used with weighted_loss
};

struct InferenceConfig {
    double lambda = 0.6;
    std::size_t stage1_k = 15;

    void validate() const {
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("inference: lambda must be in [0,1]");
        if (stage1_k == 0) throw Error("inference: stage1_k must be positive");
    }
};

struct Config {
    KgeTrainConfig kge;
    ModelConfig model;
    QaTrainConfig qa;
    InferenceConfig infer;
    PprConfig ppr;

    Config() {
        ppr.restart_prob = 0.8;
        ppr.iterations = 20;
        ppr.max_entities = 2000;
    }

    void set(const std::string& key, const std::string& value) {
        auto it = setters().find(key);
        if (it == setters().end()) throw Error("config: unknown key '" + key + "'");
        try {
            it->second(*this, value);
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw Error("config: bad value for '" + key + "': " + value);
        }
    }

    std::string to_text() const {
        std::ostringstream os;
        os.precision(17);
        os << "kge.dim = " << kge.dim << "\n"
           << "kge.epochs = " << kge.epochs << "\n"
           << "kge.learning_rate = " << kge.learning_rate << "\n"
           << "kge.negatives = " << kge.negatives_per_positive << "\n"
           << "kge.batch_size = " << kge.batch_size << "\n"
           << "kge.adversarial_temperature = " << kge.adversarial_temperature << "\n"
           << "kge.seed = " << kge.seed << "\n"
           << "kge.norm = " << to_string(kge.norm) << "\n"
           << "kge.margin = " << kge.margin << "\n"
           << "kge.model = " << to_string(kge.model_kind) << "\n"
           << "model.head = " << to_string(model.head) << "\n"
           << "model.use_paths = " << (model.use_paths ? "true" : "false") << "\n"
           << "model.path_features = " << to_string(model.features) << "\n"
           << "model.norm = " << to_string(model.norm) << "\n"
           << "model.text_width = " << model.text_width << "\n"
           << "model.attention_width = " << model.attention_width << "\n"
           << "model.max_path_length = " << model.max_path_length << "\n"
           << "model.max_paths = " << model.max_paths << "\n"
           << "model.mask_topic_mentions = " << (model.mask_topic_mentions ? "true" : "false") << "\n"
           << "model.token_init = " << model.token_init << "\n"
           << "model.seed = " << model.seed << "\n"
           << "qa.epochs = " << qa.epochs << "\n"
           << "qa.learning_rate = " << qa.learning_rate << "\n"
           << "qa.batch_size = " << qa.batch_size << "\n"
           << "qa.candidates = " << qa.candidates << "\n"
           << "qa.seed = " << qa.seed << "\n"
           << "qa.freeze_embeddings = " << (qa.freeze_embeddings ? "true" : "false") << "\n"
           << "qa.weighted_loss = " << (qa.weighted_loss ? "true" : "false") << "\n"
           << "qa.lambda = " << qa.lambda << "\n"
           << "infer.lambda = " << infer.lambda << "\n"
           << "infer.stage1_k = " << infer.stage1_k << "\n"
           << "ppr.restart_prob = " << ppr.restart_prob << "\n"
           << "ppr.iterations = " << ppr.iterations << "\n"
           << "ppr.max_entities = " << ppr.max_entities << "\n";
        return os.str();
    }

    static Config parse(std::istream& in, const std::string& source) {
        Config c;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string t = trim(line);
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos) throw ParseError(source, lineno, "expected key = value");
            try {
                c.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
            } catch (const ParseError&) {
                throw;
            } catch (const Error& e) {
                throw ParseError(source, lineno, e.what());
            }
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open config " + path);
        return parse(in, path);
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw Error("cannot write config " + path);
        out << to_text();
    }

private:
    using Setter = std::function<void(Config&, const std::string&)>;

    static bool to_bool(const std::string& v) {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw Error("expected boolean, got " + v);
    }
    static std::size_t to_size(const std::string& v) {
        std::size_t used = 0;
        const auto x = std::stoull(v, &used);
        if (used != v.size() || v.front() == '-') throw Error("expected non-negative integer, got " + v);
        return static_cast<std::size_t>(x);
    }
    static double to_real(const std::string& v) {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw Error("expected number, got " + v);
        return x;
    }

    static const std::map<std::string, Setter>& setters() {
        static const std::map<std::string, Setter> s = {
            {"kge.dim", [](Config& c, const std::string& v) { c.kge.dim = to_size(v); }},
            {"kge.epochs", [](Config& c, const std::string& v) { c.kge.epochs = to_size(v); }},
            {"kge.learning_rate", [](Config& c, const std::string& v) { c.kge.learning_rate = to_real(v); }},
            {"kge.negatives", [](Config& c, const std::string& v) { c.kge.negatives_per_positive = to_size(v); }},
            {"kge.batch_size", [](Config& c, const std::string& v) { c.kge.batch_size = to_size(v); }},
            {"kge.adversarial_temperature",
             [](Config& c, const std::string& v) { c.kge.adversarial_temperature = to_real(v); }},
            {"kge.seed", [](Config& c, const std::string& v) { c.kge.seed = to_size(v); }},
            {"kge.norm", [](Config& c, const std::string& v) { c.kge.norm = parse_norm(v); }},
            {"kge.margin", [](Config& c, const std::string& v) { c.kge.margin = to_real(v); }},
            {"kge.model", [](Config& c, const std::string& v) { c.kge.model_kind = parse_model_kind(v); }},
            {"model.head", [](Config& c, const std::string& v) { c.model.head = parse_head_kind(v); }},
            {"model.use_paths", [](Config& c, const std::string& v) { c.model.use_paths = to_bool(v); }},
            {"model.path_features", [](Config& c, const std::string& v) { c.model.features = parse_path_features(v); }},
            {"model.norm", [](Config& c, const std::string& v) { c.model.norm = parse_norm(v); }},
            {"model.text_width", [](Config& c, const std::string& v) { c.model.text_width = to_size(v); }},
            {"model.attention_width", [](Config& c, const std::string& v) { c.model.attention_width = to_size(v); }},
            {"model.max_path_length", [](Config& c, const std::string& v) { c.model.max_path_length = to_size(v); }},
            {"model.max_paths", [](Config& c, const std::string& v) { c.model.max_paths = to_size(v); }},
            {"model.mask_topic_mentions",
             [](Config& c, const std::string& v) { c.model.mask_topic_mentions = to_bool(v); }},
            {"model.token_init", [](Config& c, const std::string& v) { c.model.token_init = to_real(v); }},
            {"model.seed", [](Config& c, const std::string& v) { c.model.seed = to_size(v); }},
            {"qa.epochs", [](Config& c, const std::string& v) { c.qa.epochs = to_size(v); }},
            {"qa.learning_rate", [](Config& c, const std::string& v) { c.qa.learning_rate = to_real(v); }},
            {"qa.batch_size", [](Config& c, const std::string& v) { c.qa.batch_size = to_size(v); }},
            {"qa.candidates", [](Config& c, const std::string& v) { c.qa.candidates = to_size(v); }},
            {"qa.seed", [](Config& c, const std::string& v) { c.qa.seed = to_size(v); }},
            {"qa.freeze_embeddings", [](Config& c, const std::string& v) { c.qa.freeze_embeddings = to_bool(v); }},
            {"qa.weighted_loss", [](Config& c, const std::string& v) { c.qa.weighted_loss = to_bool(v); }},
            {"qa.lambda", [](Config& c, const std::string& v) { c.qa.lambda = to_real(v); }},
            {"infer.lambda", [](Config& c, const std::string& v) { c.infer.lambda = to_real(v); }},
            {"infer.stage1_k", [](Config& c, const std::string& v) { c.infer.stage1_k = to_size(v); }},
            {"ppr.restart_prob", [](Config& c, const std::string& v) { c.ppr.restart_prob = to_real(v); }},
            {"ppr.iterations", [](Config& c, const std::string& v) { c.ppr.iterations = to_size(v); }},
            {"ppr.max_entities", [](Config& c, const std::string& v) { c.ppr.max_entities = to_size(v); }},
        };
        return s;
    }
};

}  // namespace terp
