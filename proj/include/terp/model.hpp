#pragma once

// The question-answering model: question encoder, hybrid path encoder with
// attention, rotate-and-scale heads for both views, and the entity
// embeddings they are scored against.

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "terp/complex.hpp"
#include "terp/encoder.hpp"
#include "terp/error.hpp"
#include "terp/kge.hpp"
#include "terp/knowledge_graph.hpp"
#include "terp/nn.hpp"
#include "terp/paths.hpp"
#include "terp/predictor.hpp"
#include "terp/serialize.hpp"

namespace terp {

struct ModelConfig {
    HeadKind head = HeadKind::RotateScale;
    bool use_paths = true;
    PathFeatures features = PathFeatures::Both;
    Norm norm = Norm::L1;
    std::size_t text_width = 0;  // 0: twice the complex dimension
    std::size_t attention_width = 0;  // 0: text_width
    std::size_t max_path_length = 3;
    std::size_t max_paths = 32;
    bool mask_topic_mentions = true;
    double token_init = 0.1;
    std::uint64_t seed = 0;
};

/// Builds the token vocabulary from training questions and relation names.
inline Tokenizer build_tokenizer(const KnowledgeGraph& kg, std::span<const QuestionInstance> questions,
                                 bool mask_topic_mentions) {
    Tokenizer tok;
    for (const auto& q : questions) tok.add_text(mask_topic_mentions ? mask_mentions(q.text) : q.text);
    for (RelationId r = 0; r < static_cast<RelationId>(kg.num_relations()); ++r) tok.add_text(kg.relation_text(r));
    return tok;
}

/// Scores of one (topic, candidate) pair under both views.
struct PairScores {
    double s_q = 0.0;
    std::optional<double> s_p;
};

struct ScoringCounters {
    std::size_t score_view_calls = 0;
    std::size_t path_bundles = 0;
};

class TerpModel {
public:
    TerpModel() = default;

    /// `kg` must be inverse-augmented; `table` must match it and the head kind.
    TerpModel(KnowledgeGraph kg, EmbeddingTable table, Tokenizer tokenizer, ModelConfig cfg)
        : cfg_(cfg), kg_(std::move(kg)), table_(std::move(table)), tok_(std::move(tokenizer)) {
        if (!kg_.is_augmented()) throw Error("TerpModel: knowledge graph must carry inverse relations");
        if (table_.num_entities() != kg_.num_entities() || table_.num_relations() != kg_.num_relations())
            throw Error("TerpModel: embedding table does not match the knowledge graph");
        if ((cfg_.head == HeadKind::Complex) != (table_.model_kind() == ModelKind::ComplEx))
            throw Error("TerpModel: complex head requires ComplEx embeddings and vice versa");
        if (cfg_.text_width == 0) cfg_.text_width = 2 * table_.dim();
        if (cfg_.attention_width == 0) cfg_.attention_width = cfg_.text_width;
        build_layers();
        std::mt19937_64 rng(cfg_.seed);
        encoder_.init(rng, cfg_.token_init);
        fusion_.init(rng);
        attention_.init(rng);
        q_head_.init(rng);
        p_head_.init(rng);
    }

    const ModelConfig& config() const { return cfg_; }
    const KnowledgeGraph& graph() const { return kg_; }
    const EmbeddingTable& embeddings() const { return table_; }
    EmbeddingTable& embeddings() { return table_; }
    const Tokenizer& tokenizer() const { return tok_; }
    AverageEncoder& encoder() { return encoder_; }
    const AverageEncoder& encoder() const { return encoder_; }
    PathFusion& fusion() { return fusion_; }
    PathAttention& attention() { return attention_; }
    RotateScaleHead& question_head() { return q_head_; }
    RotateScaleHead& path_head() { return p_head_; }
    PathCache& path_cache() const { return *cache_; }

    /// Changes feature masking of the fusion input (ablation harness).
    void set_path_features(PathFeatures f) {
        cfg_.features = f;
        fusion_.set_features(f);
    }
    void set_use_paths(bool use) { cfg_.use_paths = use; }

    std::vector<TokenId> question_tokens(const std::string& text) const {
        return tok_.tokenize(cfg_.mask_topic_mentions ? mask_mentions(text) : text);
    }

    void tokenize(std::vector<QuestionInstance>& qs) const {
        for (auto& q : qs) q.tokens = question_tokens(q.text);
    }

    /// Trainable parameters. Embedding tables are excluded when frozen.
    std::vector<Param*> dense_params() {
        std::vector<Param*> ps{&encoder_.params()};
        q_head_.params(ps);
        if (cfg_.use_paths) {
            fusion_.params(ps);
            attention_.params(ps);
            p_head_.params(ps);
        }
        if (!table_.frozen()) ps.push_back(&table_.relation_params());
        return ps;
    }

    // -- scoring -----------------------------------------------------------

    struct QuestionState {
        std::vector<TokenId> tokens;
        std::vector<double> q;
        RotateScaleHead::Cache head;
    };

    QuestionState question_state(std::span<const TokenId> tokens) const {
        QuestionState s;
        s.tokens.assign(tokens.begin(), tokens.end());
        s.q = encoder_.encode(tokens);
        s.head = q_head_.forward(s.q);
        return s;
    }

    double pair_score(const ComplexVec& rep, EntityId h, EntityId c) const {
        return cfg_.head == HeadKind::Complex ? trilinear_score(table_.entity(h), rep, table_.entity(c))
                                              : rotation_score(table_.entity(h), rep, table_.entity(c), cfg_.norm);
    }

    void pair_score_backward(const ComplexVec& rep, EntityId h, EntityId c, double upstream, std::vector<double>& d_re,
                             std::vector<double>& d_im) {
        RotationGrads g{nullptr, nullptr, d_re.data(), d_im.data(), nullptr, nullptr};
        if (!table_.frozen()) g = {table_.entity_grad_re(h), table_.entity_grad_im(h), d_re.data(), d_im.data(),
                                   table_.entity_grad_re(c), table_.entity_grad_im(c)};
        if (cfg_.head == HeadKind::Complex)
            trilinear_score_backward(table_.entity(h), rep, table_.entity(c), upstream, g);
        else
            rotation_score_backward(table_.entity(h), rep, table_.entity(c), cfg_.norm, upstream, g);
    }

    /// Forward state of one relation path under one question.
    struct PathRep {
        RelationPath path;
        std::vector<TokenId> tokens;
        std::vector<double> textual;
        ComplexVec structural;
        PathFusion::Cache fusion;
    };

    PathRep path_rep(std::span<const TokenId> question_tokens, const RelationPath& path) const {
        PathRep p;
        p.path = path;
        p.tokens.assign(question_tokens.begin(), question_tokens.end());
        p.tokens.push_back(Tokenizer::kSeparator);
        for (RelationId r : path.steps) {
            p.tokens.push_back(Tokenizer::kRelOpen);
            const auto& ids = relation_tokens_[static_cast<std::size_t>(r)];
            p.tokens.insert(p.tokens.end(), ids.begin(), ids.end());
            p.tokens.push_back(Tokenizer::kRelClose);
        }
        p.textual = encoder_.encode(p.tokens);
        if (uses_structure())
            p.structural = compose_relations(path.steps, table_);
        else
            p.structural = ComplexVec(table_.dim());
        p.fusion = fusion_.forward(p.textual, p.structural);
        return p;
    }

    /// Attention + path head over a bundle of path reps.
    struct BundleState {
        std::vector<std::size_t> members;  // indices into the path-rep store
        PathAttention::Cache attention;
        RotateScaleHead::Cache head;
    };

    BundleState bundle_state(std::span<const double> q, const std::vector<PathRep>& reps,
                             std::vector<std::size_t> members) const {
        BundleState b;
        b.members = std::move(members);
        std::vector<std::span<const double>> t, h;
        for (auto m : b.members) {
            t.emplace_back(reps[m].textual);
            h.emplace_back(reps[m].fusion.ffn.output);
        }
        b.attention = attention_.forward(q, t, h);
        b.head = p_head_.forward(b.attention.output);
        return b;
    }

    /// Inference-time scorer for one question; memoizes path reps and
    /// bundles shared between candidates.
    class Scorer {
    public:
        Scorer(const TerpModel& model, std::span<const TokenId> tokens)
            : model_(model), state_(model.question_state(tokens)) {}

        double question_score(EntityId h, EntityId c) {
            ++counters_.score_view_calls;
            return model_.pair_score(state_.head.out.rep, h, c);
        }

        std::optional<double> path_score(EntityId h, EntityId c) {
            if (!model_.cfg_.use_paths || h == c) return std::nullopt;
            std::shared_ptr<const PathCache::Table> holder;
            const auto& paths = model_.path_cache().paths(model_.kg_, h, c, holder);
            if (paths.empty()) return std::nullopt;
            ++counters_.path_bundles;
            auto it = bundles_.find(paths);
            if (it == bundles_.end()) {
                std::vector<std::size_t> members;
                for (const auto& p : paths) members.push_back(rep_index(p));
                it = bundles_.emplace(paths, model_.bundle_state(state_.q, reps_, std::move(members))).first;
            }
            ++counters_.score_view_calls;
            return model_.pair_score(it->second.head.out.rep, h, c);
        }

        PairScores score(EntityId h, EntityId c) {
            PairScores s;
            s.s_q = question_score(h, c);
            s.s_p = path_score(h, c);
            return s;
        }

        const QuestionState& state() const { return state_; }
        const ScoringCounters& counters() const { return counters_; }

    private:
        std::size_t rep_index(const RelationPath& p) {
            auto it = rep_ids_.find(p);
            if (it != rep_ids_.end()) return it->second;
            reps_.push_back(model_.path_rep(state_.tokens, p));
            rep_ids_.emplace(p, reps_.size() - 1);
            return reps_.size() - 1;
        }

        const TerpModel& model_;
        QuestionState state_;
        std::vector<PathRep> reps_;
        std::map<RelationPath, std::size_t> rep_ids_;
        std::map<std::vector<RelationPath>, BundleState> bundles_;
        ScoringCounters counters_;
    };

    /// Scores a single (question text, topic, candidate) triple.
    PairScores score(const std::string& question, EntityId h, EntityId c) const {
        Scorer s(*this, question_tokens(question));
        return s.score(h, c);
    }

    // -- training ----------------------------------------------------------

    struct ExampleOptions {
        double scale = 1.0;          // multiplies the loss and every gradient
        bool weighted_loss = false;  // (1-lambda) L_ques + lambda L_path
        double lambda = 0.6;
    };

    /// Loss of one training example (question tokens, topic h, candidates with
    /// the gold at target) and, when accumulate is set, its gradients. Touched
    /// entity rows are appended to entity_rows.
    double example_loss(std::span<const TokenId> tokens, EntityId h, std::span<const EntityId> candidates,
                        std::size_t target, const ExampleOptions& opt, bool accumulate,
                        std::vector<std::size_t>* entity_rows = nullptr) {
        const std::size_t n = candidates.size();
        const std::size_t d = table_.dim();
        QuestionState qs = question_state(tokens);
        std::vector<double> sq(n);
        for (std::size_t i = 0; i < n; ++i) sq[i] = pair_score(qs.head.out.rep, h, candidates[i]);

        // path view, grouped by identical path sets
        std::vector<PathRep> reps;
        std::map<RelationPath, std::size_t> rep_ids;
        std::vector<BundleState> bundles;
        std::map<std::vector<RelationPath>, std::size_t> bundle_ids;
        std::vector<long> cand_bundle(n, -1);
        std::shared_ptr<const PathCache::Table> holder;
        if (cfg_.use_paths) {
            holder = cache_->from(kg_, h);
            for (std::size_t i = 0; i < n; ++i) {
                if (candidates[i] == h) continue;
                const auto& paths = (*holder)[static_cast<std::size_t>(candidates[i])];
                if (paths.empty()) continue;
                auto it = bundle_ids.find(paths);
                if (it == bundle_ids.end()) {
                    std::vector<std::size_t> members;
                    for (const auto& p : paths) {
                        auto r = rep_ids.find(p);
                        if (r == rep_ids.end()) {
                            reps.push_back(path_rep(tokens, p));
                            r = rep_ids.emplace(p, reps.size() - 1).first;
                        }
                        members.push_back(r->second);
                    }
                    bundles.push_back(bundle_state(qs.q, reps, std::move(members)));
                    it = bundle_ids.emplace(paths, bundles.size() - 1).first;
                }
                cand_bundle[i] = static_cast<long>(it->second);
            }
        }
        // path-less candidates enter the path-view CE with their question-view
        // score, the same fallback inference ranks them by
        std::vector<double> sp(n);
        for (std::size_t i = 0; i < n; ++i)
            sp[i] = cand_bundle[i] < 0
                        ? sq[i]
                        : pair_score(bundles[static_cast<std::size_t>(cand_bundle[i])].head.out.rep, h, candidates[i]);
        const bool path_term = cand_bundle[target] >= 0;
        const double wq = opt.weighted_loss ? (1.0 - opt.lambda) : 1.0;
        const double wp = opt.weighted_loss ? opt.lambda : 1.0;

        std::vector<double> dsq(n), dsp(sp.size());
        double loss = wq * cross_entropy(sq, target, dsq);
        if (path_term) loss += wp * cross_entropy(sp, target, dsp);
        loss *= opt.scale;
        if (!accumulate) return loss;

        if (entity_rows && !table_.frozen()) {
            entity_rows->push_back(static_cast<std::size_t>(h));
            for (EntityId c : candidates) entity_rows->push_back(static_cast<std::size_t>(c));
        }

        // question view
        std::vector<double> drq_re(d, 0.0), drq_im(d, 0.0), dq(qs.q.size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double g = wq * dsq[i];
            if (path_term && cand_bundle[i] < 0) g += wp * dsp[i];
            pair_score_backward(qs.head.out.rep, h, candidates[i], opt.scale * g, drq_re, drq_im);
        }
        q_head_.backward(qs.q, qs.head, drq_re, drq_im, dq);

        // path view
        if (path_term) {
            std::vector<std::vector<double>> drp_re(bundles.size(), std::vector<double>(d, 0.0));
            std::vector<std::vector<double>> drp_im(bundles.size(), std::vector<double>(d, 0.0));
            for (std::size_t i = 0; i < n; ++i) {
                if (cand_bundle[i] < 0) continue;
                const auto b = static_cast<std::size_t>(cand_bundle[i]);
                pair_score_backward(bundles[b].head.out.rep, h, candidates[i], opt.scale * wp * dsp[i], drp_re[b],
                                    drp_im[b]);
            }
            const std::size_t tw = cfg_.text_width;
            std::vector<std::vector<double>> d_text(reps.size(), std::vector<double>(tw, 0.0));
            std::vector<std::vector<double>> d_hyb(reps.size(), std::vector<double>(tw, 0.0));
            for (std::size_t b = 0; b < bundles.size(); ++b) {
                const BundleState& bs = bundles[b];
                std::vector<double> dp(tw, 0.0);
                p_head_.backward(bs.attention.output, bs.head, drp_re[b], drp_im[b], dp);
                std::vector<std::span<const double>> t, hy;
                for (auto m : bs.members) {
                    t.emplace_back(reps[m].textual);
                    hy.emplace_back(reps[m].fusion.ffn.output);
                }
                std::vector<std::vector<double>> dt(bs.members.size(), std::vector<double>(tw, 0.0));
                std::vector<std::vector<double>> dh(bs.members.size(), std::vector<double>(tw, 0.0));
                attention_.backward(qs.q, t, hy, bs.attention, dp, dq, dt, dh);
                for (std::size_t k = 0; k < bs.members.size(); ++k)
                    for (std::size_t x = 0; x < tw; ++x) {
                        d_text[bs.members[k]][x] += dt[k][x];
                        d_hyb[bs.members[k]][x] += dh[k][x];
                    }
            }
            std::vector<double> dpl_re(d), dpl_im(d);
            for (std::size_t r = 0; r < reps.size(); ++r) {
                std::fill(dpl_re.begin(), dpl_re.end(), 0.0);
                std::fill(dpl_im.begin(), dpl_im.end(), 0.0);
                fusion_.backward(reps[r].fusion, d_hyb[r], d_text[r], dpl_re, dpl_im);
                encoder_.backward(reps[r].tokens, d_text[r]);
                if (uses_structure() && !table_.frozen())
                    compose_relations_backward(reps[r].path.steps, table_, reps[r].structural, dpl_re, dpl_im);
            }
        }
        encoder_.backward(tokens, dq);
        return loss;
    }

    // -- persistence -------------------------------------------------------

    void save(const std::string& path, const std::string& kge_reference = {}) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write model checkpoint " + path);
        BinaryWriter w(out);
        w.str("TERPQA01");
        w.str(kge_reference);
        w.str(to_string(cfg_.head));
        w.u64(cfg_.use_paths ? 1 : 0);
        w.str(to_string(cfg_.features));
        w.str(to_string(cfg_.norm));
        w.u64(cfg_.text_width);
        w.u64(cfg_.attention_width);
        w.u64(cfg_.max_path_length);
        w.u64(cfg_.max_paths);
        w.u64(cfg_.mask_topic_mentions ? 1 : 0);
        w.f64(cfg_.token_init);
        w.u64(cfg_.seed);
        // graph: forward relations and triples only
        w.strings(kg_.entities().labels());
        std::vector<std::string> rels;
        for (std::size_t r = 0; r < kg_.num_base_relations(); ++r)
            rels.push_back(kg_.relations().label(static_cast<RelationId>(r)));
        w.strings(rels);
        std::vector<std::int32_t> flat;
        for (const Triple& t : kg_.triples()) {
            if (kg_.is_inverse(t.relation)) continue;
            flat.insert(flat.end(), {t.head, t.relation, t.tail});
        }
        w.ints(flat);
        table_.save(w);
        w.strings(tok_.vocabulary().labels());
        encoder_.save(w);
        fusion_.save(w);
        attention_.save(w);
        q_head_.save(w);
        p_head_.save(w);
    }

    static TerpModel load(const std::string& path, std::string* kge_reference = nullptr) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open model checkpoint " + path);
        BinaryReader r(in);
        if (r.str() != "TERPQA01") throw Error("model checkpoint: bad header");
        TerpModel m;
        const std::string ref = r.str();
        if (kge_reference) *kge_reference = ref;
        m.cfg_.head = parse_head_kind(r.str());
        m.cfg_.use_paths = r.u64() != 0;
        m.cfg_.features = parse_path_features(r.str());
        m.cfg_.norm = parse_norm(r.str());
        m.cfg_.text_width = r.u64();
        m.cfg_.attention_width = r.u64();
        m.cfg_.max_path_length = r.u64();
        m.cfg_.max_paths = r.u64();
        m.cfg_.mask_topic_mentions = r.u64() != 0;
        m.cfg_.token_init = r.f64();
        m.cfg_.seed = r.u64();
        Vocabulary ents, rels;
        for (const auto& s : r.strings()) ents.add(s);
        for (const auto& s : r.strings()) rels.add(s);
        const auto flat = r.ints();
        if (flat.size() % 3 != 0) throw Error("model checkpoint: corrupt triples");
        std::vector<Triple> triples;
        for (std::size_t i = 0; i < flat.size(); i += 3) triples.push_back({flat[i], flat[i + 1], flat[i + 2]});
        m.kg_ = add_inverse_relations(KnowledgeGraph(std::move(ents), std::move(rels), triples));
        m.table_ = EmbeddingTable::load(r);
        m.tok_ = Tokenizer::from_tokens(r.strings());
        m.build_layers();
        m.encoder_.load(r);
        m.fusion_.load(r);
        m.attention_.load(r);
        m.q_head_.load(r);
        m.p_head_.load(r);
        return m;
    }

private:
    bool uses_structure() const {
        return table_.model_kind() == ModelKind::RotatE && cfg_.features != PathFeatures::TextualOnly;
    }

    void build_layers() {
        const std::size_t d = table_.dim();
        encoder_ = AverageEncoder(tok_.size(), cfg_.text_width);
        fusion_ = PathFusion(cfg_.text_width, d, cfg_.features);
        attention_ = PathAttention(cfg_.text_width, cfg_.attention_width);
        q_head_ = RotateScaleHead(cfg_.text_width, d, cfg_.head);
        p_head_ = RotateScaleHead(cfg_.text_width, d, cfg_.head);
        relation_tokens_.clear();
        for (RelationId r = 0; r < static_cast<RelationId>(kg_.num_relations()); ++r)
            relation_tokens_.push_back(tok_.tokenize(kg_.relation_text(r)));
        cache_ = std::make_shared<PathCache>(cfg_.max_path_length, cfg_.max_paths);
    }

    ModelConfig cfg_;
    KnowledgeGraph kg_;
    EmbeddingTable table_;
    Tokenizer tok_;
    AverageEncoder encoder_;
    PathFusion fusion_;
    PathAttention attention_;
    RotateScaleHead q_head_;
    RotateScaleHead p_head_;
    std::vector<std::vector<TokenId>> relation_tokens_;
    std::shared_ptr<PathCache> cache_ = std::make_shared<PathCache>();
};

}  // namespace terp
