#pragma once

// QA training loop, two-stage inference, topic aggregation, hits@1
// evaluation, lambda sweep and the ablation harness.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "terp/config.hpp"
#include "terp/error.hpp"
#include "terp/kge.hpp"
#include "terp/knowledge_graph.hpp"
#include "terp/model.hpp"
#include "terp/predictor.hpp"

namespace terp {

// ---------------------------------------------------------------------------
// training

struct QaExample {
    std::size_t instance = 0;
    EntityId topic = 0;
    EntityId gold = 0;
};

/// One example per (instance, topic entity, gold answer inside the subgraph).
inline std::vector<QaExample> make_examples(std::span<const QuestionInstance> data, std::span<const Subgraph> subgraphs) {
    if (data.size() != subgraphs.size()) throw Error("train_qa: one subgraph per instance required");
    std::vector<QaExample> out;
    for (std::size_t i = 0; i < data.size(); ++i)
        for (EntityId h : data[i].topic_entities)
            for (EntityId a : data[i].answers)
                if (subgraphs[i].contains(a)) out.push_back({i, h, a});
    return out;
}

struct QaTrainResult {
    std::vector<double> epoch_losses;
    std::size_t examples = 0;
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

inline QaTrainResult train_qa(TerpModel& model, std::span<const QuestionInstance> data,
                              std::span<const Subgraph> subgraphs, const QaTrainConfig& cfg,
                              const EpochCallback& on_epoch = {}) {
    if (data.empty()) throw Error("train_qa: dataset is empty");
    if (cfg.batch_size == 0) throw Error("train_qa: batch_size must be positive");
    if (cfg.candidates == 0) throw Error("train_qa: candidates must be positive");
    if (!(cfg.learning_rate > 0.0)) throw Error("train_qa: learning_rate must be positive");
    std::vector<QaExample> examples = make_examples(data, subgraphs);
    if (examples.empty()) throw Error("train_qa: no instance has a gold answer inside its subgraph");

    std::vector<std::vector<TokenId>> tokens(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        tokens[i] = data[i].tokens.empty() ? model.question_tokens(data[i].text) : data[i].tokens;

    EmbeddingTable& table = model.embeddings();
    table.set_frozen(cfg.freeze_embeddings);
    std::vector<Param*> dense = model.dense_params();
    Adam adam(AdamConfig{cfg.learning_rate, 0.9, 0.998, 1e-8});
    std::mt19937_64 rng(cfg.seed);
    const std::size_t ew = 2 * table.dim();
    std::vector<std::size_t> rows;
    std::vector<char> seen(table.num_entities(), 0);

    QaTrainResult res;
    res.examples = examples.size();
    TerpModel::ExampleOptions opt;
    opt.weighted_loss = cfg.weighted_loss;
    opt.lambda = cfg.lambda;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(examples.begin(), examples.end(), rng);
        double total = 0.0;
        for (std::size_t start = 0; start < examples.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(examples.size(), start + cfg.batch_size);
            opt.scale = 1.0 / static_cast<double>(stop - start);
            zero_grads(dense);
            rows.clear();
            for (std::size_t k = start; k < stop; ++k) {
                const QaExample& ex = examples[k];
                const QuestionInstance& q = data[ex.instance];
                const CandidateSample s =
                    sample_candidates_for(subgraphs[ex.instance], ex.gold, q.answers, cfg.candidates, rng);
                total += model.example_loss(tokens[ex.instance], ex.topic, s.candidates, s.target_index, opt, true,
                                            &rows) /
                         opt.scale;
            }
            adam.begin_step();
            for (Param* p : dense) adam.update(*p);
            if (!table.frozen()) {
                std::vector<std::size_t> uniq;
                for (auto r : rows)
                    if (!seen[r]) {
                        seen[r] = 1;
                        uniq.push_back(r);
                    }
                adam.update_rows(table.entity_params(), uniq, ew);
                auto& g = table.entity_params().grad;
                for (auto r : uniq) {
                    std::fill_n(g.begin() + static_cast<std::ptrdiff_t>(r * ew), ew, 0.0);
                    seen[r] = 0;
                }
            }
        }
        const double mean = total / static_cast<double>(examples.size());
        res.epoch_losses.push_back(mean);
        if (on_epoch) on_epoch(epoch, mean);
    }
    return res;
}

// ---------------------------------------------------------------------------
// inference

struct ScoredCandidate {
    EntityId entity = 0;
    double s_q = 0.0;
    std::optional<double> s_p;
    double s = 0.0;
};

struct AggregatedScore {
    double s_q = 0.0;
    std::optional<double> s_p;
    double s = 0.0;
};

/// Mean s_q over topics, mean s_p over the topics that have paths, then the
/// lambda combination.
inline AggregatedScore aggregate_topics(std::span<const PairScores> per_topic, double lambda) {
    if (per_topic.empty()) throw Error("aggregate_topics: no topic scores");
    AggregatedScore a;
    double sp = 0.0;
    std::size_t np = 0;
    for (const auto& t : per_topic) {
        a.s_q += t.s_q;
        if (t.s_p) {
            sp += *t.s_p;
            ++np;
        }
    }
    a.s_q /= static_cast<double>(per_topic.size());
    if (np) a.s_p = sp / static_cast<double>(np);
    a.s = combine(a.s_q, a.s_p, lambda);
    return a;
}

/// Descending score, ascending entity id.
inline void rank_candidates(std::vector<ScoredCandidate>& cands) {
    std::sort(cands.begin(), cands.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (a.s != b.s) return a.s > b.s;
        return a.entity < b.entity;
    });
}

struct InferenceResult {
    std::vector<ScoredCandidate> ranked;
    ScoringCounters counters;
};

/// Per-topic scores of the recalled candidates; lambda-independent, so the
/// sweep can recombine them cheaply.
struct RecalledScores {
    std::vector<EntityId> recalled;                   // stage-1 order
    std::vector<std::vector<PairScores>> per_topic;   // [candidate][topic]
    ScoringCounters counters;
};

inline std::vector<TokenId> instance_tokens(const TerpModel& model, const QuestionInstance& q) {
    return q.tokens.empty() ? model.question_tokens(q.text) : q.tokens;
}

inline void check_inference_inputs(const QuestionInstance& q, const Subgraph& sg) {
    if (sg.entity_ids.empty()) throw Error("inference: empty subgraph");
    if (q.topic_entities.empty()) throw Error("inference: question has no topic entity");
}

inline RecalledScores recall_candidates(const TerpModel& model, const QuestionInstance& q, const Subgraph& sg,
                                        std::size_t k) {
    check_inference_inputs(q, sg);
    if (k == 0) throw Error("inference: stage1_k must be positive");
    TerpModel::Scorer scorer(model, instance_tokens(model, q));
    const std::size_t nt = q.topic_entities.size();
    std::vector<ScoredCandidate> stage1(sg.size());
    for (std::size_t i = 0; i < sg.size(); ++i) {
        const EntityId c = sg.entity_ids[i];
        double sum = 0.0;
        for (EntityId h : q.topic_entities) sum += scorer.question_score(h, c);
        stage1[i].entity = c;
        stage1[i].s_q = sum / static_cast<double>(nt);
        stage1[i].s = stage1[i].s_q;
    }
    rank_candidates(stage1);
    stage1.resize(std::min(k, stage1.size()));

    RecalledScores out;
    for (const auto& c : stage1) {
        out.recalled.push_back(c.entity);
        std::vector<PairScores> topics(nt);
        for (std::size_t t = 0; t < nt; ++t) {
            // reuse the stage-1 computation order so the mean is bit-identical
            topics[t].s_q = model.pair_score(scorer.state().head.out.rep, q.topic_entities[t], c.entity);
            topics[t].s_p = scorer.path_score(q.topic_entities[t], c.entity);
        }
        out.per_topic.push_back(std::move(topics));
    }
    out.counters = scorer.counters();
    return out;
}

inline std::vector<ScoredCandidate> rank_recalled(const RecalledScores& r, double lambda) {
    std::vector<ScoredCandidate> out;
    out.reserve(r.recalled.size());
    for (std::size_t i = 0; i < r.recalled.size(); ++i) {
        const AggregatedScore a = aggregate_topics(r.per_topic[i], lambda);
        out.push_back({r.recalled[i], a.s_q, a.s_p, a.s});
    }
    rank_candidates(out);
    return out;
}

/// Stage 1 ranks the whole subgraph by the question view and keeps the top
/// k; stage 2 adds the path view for those k only. Returns the k recalled
/// candidates ranked by the combined score.
inline InferenceResult two_stage_infer(const TerpModel& model, const QuestionInstance& q, const Subgraph& sg,
                                       const InferenceConfig& cfg) {
    cfg.validate();
    const RecalledScores r = recall_candidates(model, q, sg, cfg.stage1_k);
    return {rank_recalled(r, cfg.lambda), r.counters};
}

/// Both views for every subgraph entity.
inline InferenceResult exhaustive_rank(const TerpModel& model, const QuestionInstance& q, const Subgraph& sg,
                                       double lambda) {
    check_inference_inputs(q, sg);
    TerpModel::Scorer scorer(model, instance_tokens(model, q));
    InferenceResult out;
    std::vector<PairScores> topics(q.topic_entities.size());
    for (EntityId c : sg.entity_ids) {
        for (std::size_t t = 0; t < topics.size(); ++t) topics[t] = scorer.score(q.topic_entities[t], c);
        const AggregatedScore a = aggregate_topics(topics, lambda);
        out.ranked.push_back({c, a.s_q, a.s_p, a.s});
    }
    rank_candidates(out.ranked);
    out.counters = scorer.counters();
    return out;
}

// ---------------------------------------------------------------------------
// evaluation

inline double hits_at_1(std::span<const std::optional<EntityId>> predictions,
                        std::span<const std::vector<EntityId>> gold) {
    if (predictions.size() != gold.size()) throw Error("hits_at_1: length mismatch");
    if (predictions.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] && std::find(gold[i].begin(), gold[i].end(), *predictions[i]) != gold[i].end()) ++hit;
    return static_cast<double>(hit) / static_cast<double>(predictions.size());
}

inline std::string hop_bucket(const QuestionInstance& q) {
    return q.hop_annotation ? std::to_string(*q.hop_annotation) + "-hop" : std::string("unannotated");
}

struct BucketStats {
    std::size_t count = 0;
    std::size_t correct = 0;
    double hits_at_1() const { return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0; }
};

struct Prediction {
    std::size_t index = 0;
    std::string bucket;
    std::optional<EntityId> entity;
    double score = 0.0;
    bool correct = false;
};

struct EvalReport {
    BucketStats overall;
    std::map<std::string, BucketStats> buckets;
    std::vector<Prediction> predictions;
    std::size_t stage1_score_calls = 0;    // question-view score_view calls
    std::size_t path_bundles = 0;          // path-view computations actually done
    std::size_t exhaustive_path_bundles = 0;  // what scoring every candidate would need

    double hits_at_1() const { return overall.hits_at_1(); }
    double bucket_hits(const std::string& b) const {
        auto it = buckets.find(b);
        return it == buckets.end() ? 0.0 : it->second.hits_at_1();
    }

    std::string to_tsv(const KnowledgeGraph& kg) const {
        std::ostringstream os;
        char buf[64];
        os << "bucket\tcount\tcorrect\thits_at_1\n";
        auto row = [&](const std::string& name, const BucketStats& s) {
            std::snprintf(buf, sizeof buf, "%.17g", s.hits_at_1());
            os << name << '\t' << s.count << '\t' << s.correct << '\t' << buf << '\n';
        };
        row("all", overall);
        for (const auto& [name, s] : buckets) row(name, s);
        os << "\nindex\tbucket\tprediction\tscore\tcorrect\n";
        for (const auto& p : predictions) {
            std::snprintf(buf, sizeof buf, "%.17g", p.score);
            os << p.index << '\t' << p.bucket << '\t' << (p.entity ? kg.entities().label(*p.entity) : "-") << '\t'
               << buf << '\t' << (p.correct ? 1 : 0) << '\n';
        }
        os << "\ncounter\tvalue\n"
           << "stage1_score_calls\t" << stage1_score_calls << '\n'
           << "path_bundles\t" << path_bundles << '\n'
           << "exhaustive_path_bundles\t" << exhaustive_path_bundles << '\n';
        return os.str();
    }

    std::string summary() const {
        std::ostringstream os;
        char buf[128];
        std::snprintf(buf, sizeof buf, "hits@1 all      %.4f  (%zu/%zu)\n", overall.hits_at_1(), overall.correct,
                      overall.count);
        os << buf;
        for (const auto& [name, s] : buckets) {
            std::snprintf(buf, sizeof buf, "hits@1 %-9s%.4f  (%zu/%zu)\n", name.c_str(), s.hits_at_1(), s.correct,
                          s.count);
            os << buf;
        }
        os << "path bundles    " << path_bundles << " (exhaustive would need " << exhaustive_path_bundles << ")\n";
        return os.str();
    }
};

inline bool is_gold(const QuestionInstance& q, EntityId e) {
    return std::find(q.answers.begin(), q.answers.end(), e) != q.answers.end();
}

namespace detail {

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += threads) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::size_t default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

inline std::size_t count_path_pairs(const TerpModel& model, const QuestionInstance& q, const Subgraph& sg) {
    if (!model.config().use_paths) return 0;
    std::size_t n = 0;
    for (EntityId h : q.topic_entities) {
        auto table = model.path_cache().from(model.graph(), h);
        for (EntityId c : sg.entity_ids)
            if (c != h && !(*table)[static_cast<std::size_t>(c)].empty()) ++n;
    }
    return n;
}

}  // namespace detail

/// Builds a report from per-question recalled scores at one lambda.
inline EvalReport report_from(const TerpModel& model, std::span<const QuestionInstance> data,
                              std::span<const Subgraph> subgraphs, std::span<const RecalledScores> scores,
                              double lambda) {
    EvalReport rep;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto ranked = rank_recalled(scores[i], lambda);
        Prediction p;
        p.index = i;
        p.bucket = hop_bucket(data[i]);
        if (!ranked.empty()) {
            p.entity = ranked.front().entity;
            p.score = ranked.front().s;
            p.correct = is_gold(data[i], *p.entity);
        }
        rep.overall.count++;
        rep.overall.correct += p.correct;
        auto& b = rep.buckets[p.bucket];
        b.count++;
        b.correct += p.correct;
        rep.stage1_score_calls += subgraphs[i].size() * data[i].topic_entities.size();
        rep.path_bundles += scores[i].counters.path_bundles;
        rep.exhaustive_path_bundles += detail::count_path_pairs(model, data[i], subgraphs[i]);
        rep.predictions.push_back(std::move(p));
    }
    return rep;
}

inline std::vector<RecalledScores> recall_all(const TerpModel& model, std::span<const QuestionInstance> data,
                                              std::span<const Subgraph> subgraphs, std::size_t k,
                                              std::size_t threads) {
    if (data.size() != subgraphs.size()) throw Error("evaluate: one subgraph per instance required");
    std::vector<RecalledScores> out(data.size());
    detail::parallel_for(data.size(), threads,
                         [&](std::size_t i) { out[i] = recall_candidates(model, data[i], subgraphs[i], k); });
    return out;
}

inline EvalReport evaluate(const TerpModel& model, std::span<const QuestionInstance> data,
                           std::span<const Subgraph> subgraphs, const InferenceConfig& cfg,
                           std::size_t threads = detail::default_threads()) {
    cfg.validate();
    if (data.empty()) throw Error("evaluate: dataset is empty");
    const auto scores = recall_all(model, data, subgraphs, cfg.stage1_k, threads);
    return report_from(model, data, subgraphs, scores, cfg.lambda);
}

struct SweepRow {
    double lambda = 0.0;
    std::string bucket;
    BucketStats stats;
};

/// Scores once, then recombines per lambda. Rows are lambda-major with the
/// "all" bucket first, so |rows| = |lambdas| x |buckets|.
inline std::vector<SweepRow> lambda_sweep(const TerpModel& model, std::span<const QuestionInstance> data,
                                          std::span<const Subgraph> subgraphs, std::span<const double> lambdas,
                                          std::size_t stage1_k, std::size_t threads = detail::default_threads()) {
    if (lambdas.empty()) throw Error("lambda_sweep: empty lambda list");
    for (double l : lambdas)
        if (!(l >= 0.0 && l <= 1.0)) throw Error("lambda_sweep: lambda must be in [0,1]");
    if (data.empty()) throw Error("lambda_sweep: dataset is empty");
    const auto scores = recall_all(model, data, subgraphs, stage1_k, threads);
    std::vector<SweepRow> rows;
    for (double l : lambdas) {
        const EvalReport rep = report_from(model, data, subgraphs, scores, l);
        rows.push_back({l, "all", rep.overall});
        for (const auto& [name, s] : rep.buckets) rows.push_back({l, name, s});
    }
    return rows;
}

inline std::string sweep_tsv(std::span<const SweepRow> rows, double highlight = 0.6) {
    std::ostringstream os;
    char buf[128];
    os << "lambda\tbucket\tcount\thits_at_1\tdefault\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.2f\t%s\t%zu\t%.6f\t%s\n", r.lambda, r.bucket.c_str(), r.stats.count,
                      r.stats.hits_at_1(), std::abs(r.lambda - highlight) < 1e-12 ? "*" : "");
        os << buf;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// experiments

struct Experiment {
    KnowledgeGraph kg;  // inverse-augmented
    std::vector<QuestionInstance> train, dev, test;
    std::vector<Subgraph> train_sub, dev_sub, test_sub;
};

inline std::vector<Subgraph> extract_subgraphs(const KnowledgeGraph& kg, std::span<const QuestionInstance> data,
                                               const PprConfig& cfg) {
    std::vector<Subgraph> out;
    out.reserve(data.size());
    const bool everything = cfg.max_entities >= kg.num_entities();
    for (const auto& q : data)
        out.push_back(everything ? full_subgraph(kg, q.answers) : ppr_subgraph(kg, q.topic_entities, q.answers, cfg));
    return out;
}

/// Loads a triples file plus MetaQA-style QA splits. Any split path may be
/// empty.
inline Experiment load_experiment(const std::string& kb, const std::string& train, const std::string& dev,
                                  const std::string& test, const PprConfig& ppr) {
    Experiment ex;
    ex.kg = add_inverse_relations(load_triples(kb));
    auto load = [&](const std::string& path, std::vector<QuestionInstance>& qs, std::vector<Subgraph>& sg) {
        if (path.empty()) return;
        qs = load_qa(path, ex.kg).instances;
        sg = extract_subgraphs(ex.kg, qs, ppr);
    };
    load(train, ex.train, ex.train_sub);
    load(dev, ex.dev, ex.dev_sub);
    load(test, ex.test, ex.test_sub);
    return ex;
}

/// KGE tables keyed by embedding family, trained once per experiment.
class KgeCache {
public:
    explicit KgeCache(KgeTrainConfig base) : base_(base) {}

    const EmbeddingTable& get(const KnowledgeGraph& kg, ModelKind kind) {
        auto it = tables_.find(kind);
        if (it != tables_.end()) return it->second;
        KgeTrainConfig c = base_;
        c.model_kind = kind;
        return tables_.emplace(kind, train_kge(kg, c)).first->second;
    }

private:
    KgeTrainConfig base_;
    std::map<ModelKind, EmbeddingTable> tables_;
};

inline ModelKind embedding_kind_for(HeadKind h) { return h == HeadKind::Complex ? ModelKind::ComplEx : ModelKind::RotatE; }

/// Builds and trains a QA model on ex.train given pretrained embeddings.
inline TerpModel train_model(const Experiment& ex, const EmbeddingTable& table, const Config& cfg,
                             QaTrainResult* result = nullptr, const EpochCallback& on_epoch = {}) {
    if (ex.train.empty()) throw Error("train_model: experiment has no training split");
    TerpModel model(ex.kg, table, build_tokenizer(ex.kg, ex.train, cfg.model.mask_topic_mentions), cfg.model);
    QaTrainResult r = train_qa(model, ex.train, ex.train_sub, cfg.qa, on_epoch);
    if (result) *result = std::move(r);
    return model;
}

// ---------------------------------------------------------------------------
// ablations

struct Variant {
    bool with_path = true;
    HeadKind head = HeadKind::RotateScale;
    PathFeatures features = PathFeatures::Both;

    std::string name() const {
        std::string s = with_path ? "with_path" : "without_path";
        s += ":";
        s += to_string(head);
        if (with_path) {
            s += ":";
            s += to_string(features);
        }
        return s;
    }
};

/// "with_path:rotate_scale:both", "without_path:rotate", ... The feature
/// part defaults to both and is meaningless without paths.
inline Variant parse_variant(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() < 2 || parts.size() > 3) throw Error("unknown variant: " + text);
    Variant v;
    if (parts[0] == "with_path")
        v.with_path = true;
    else if (parts[0] == "without_path")
        v.with_path = false;
    else
        throw Error("unknown variant: " + text);
    try {
        v.head = parse_head_kind(parts[1]);
        if (parts.size() == 3) v.features = parse_path_features(parts[2]);
    } catch (const Error&) {
        throw Error("unknown variant: " + text);
    }
    if (v.head == HeadKind::Complex && v.with_path && v.features == PathFeatures::StructuralOnly)
        throw Error("unknown variant: " + text + " (ComplEx relations do not compose)");
    return v;
}

struct AblationRow {
    Variant variant;
    EvalReport report;
};

inline std::vector<AblationRow> ablation_run(const Experiment& ex, std::span<const Variant> variants,
                                             const Config& base, KgeCache& kge, bool use_dev = false) {
    std::vector<AblationRow> rows;
    for (const Variant& v : variants) {
        Config cfg = base;
        cfg.model.head = v.head;
        cfg.model.use_paths = v.with_path;
        cfg.model.features = v.features;
        const EmbeddingTable& table = kge.get(ex.kg, embedding_kind_for(v.head));
        const TerpModel model = train_model(ex, table, cfg);
        const auto& data = use_dev ? ex.dev : ex.test;
        const auto& sub = use_dev ? ex.dev_sub : ex.test_sub;
        rows.push_back({v, evaluate(model, data, sub, cfg.infer)});
    }
    return rows;
}

inline std::string ablation_tsv(std::span<const AblationRow> rows) {
    std::set<std::string> names;
    for (const auto& r : rows)
        for (const auto& [b, s] : r.report.buckets) names.insert(b);
    std::ostringstream os;
    char buf[32];
    os << "variant\tall";
    for (const auto& b : names) os << '\t' << b;
    os << '\n';
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.4f", r.report.hits_at_1());
        os << r.variant.name() << '\t' << buf;
        for (const auto& b : names) {
            std::snprintf(buf, sizeof buf, "%.4f", r.report.bucket_hits(b));
            os << '\t' << buf;
        }
        os << '\n';
    }
    return os.str();
}

/// Hyperparameters for the synthetic benchmark written by gen-toy.
inline Config toy_config() {
    Config c;
    c.kge.dim = 32;
    c.kge.epochs = 300;
    c.kge.learning_rate = 0.01;
    c.kge.negatives_per_positive = 16;
    c.kge.batch_size = 64;
    c.kge.margin = 6.0;
    c.model.max_paths = 16;
    c.qa.epochs = 10;
    c.qa.learning_rate = 2e-3;
    c.qa.batch_size = 16;
    c.qa.candidates = 64;
    c.qa.freeze_embeddings = false;
    c.ppr.max_entities = 60;
    return c;
}

}  // namespace terp
