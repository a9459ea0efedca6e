#pragma once

// Knowledge-graph embeddings: RotatE (relations stored as phase vectors, so
// every relation has unit modulus by construction) and the ComplEx baseline,
// trained natively with negative sampling and Adam.
//
// Inverse relations of an augmented graph are never parameterised on their
// own: relation r^-1 is the conjugate of r.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "terp/complex.hpp"
#include "terp/error.hpp"
#include "terp/knowledge_graph.hpp"
#include "terp/nn.hpp"
#include "terp/serialize.hpp"

namespace terp {

enum class ModelKind { RotatE, ComplEx };

inline const char* to_string(ModelKind k) { return k == ModelKind::RotatE ? "rotate" : "complex"; }

inline ModelKind parse_model_kind(const std::string& s) {
    if (s == "rotate" || s == "rotate_scale" || s == "RotatE") return ModelKind::RotatE;
    if (s == "complex" || s == "ComplEx") return ModelKind::ComplEx;
    throw Error("unknown model kind: " + s);
}

inline const char* to_string(Norm n) { return n == Norm::L1 ? "L1" : "L2"; }

inline Norm parse_norm(const std::string& s) {
    if (s == "L1" || s == "l1") return Norm::L1;
    if (s == "L2" || s == "l2") return Norm::L2;
    throw Error("unknown norm: " + s);
}

struct KgeTrainConfig {
    std::size_t dim = 64;
    std::size_t epochs = 100;
    double learning_rate = 0.01;
    std::size_t negatives_per_positive = 32;
    std::size_t batch_size = 128;
    double adversarial_temperature = 0.0;
    std::uint64_t seed = 0;
    Norm norm = Norm::L1;
    double margin = 6.0;
    ModelKind model_kind = ModelKind::RotatE;

    void validate() const {
        if (dim == 0) throw Error("kge: dim must be positive");
        if (negatives_per_positive == 0) throw Error("kge: negatives_per_positive must be positive");
        if (batch_size == 0) throw Error("kge: batch_size must be positive");
        if (!(learning_rate > 0.0)) throw Error("kge: learning_rate must be positive");
        if (adversarial_temperature < 0.0) throw Error("kge: adversarial_temperature must be >= 0");
    }
};

class EmbeddingTable {
public:
    EmbeddingTable() = default;

    EmbeddingTable(ModelKind kind, std::size_t dim, std::size_t num_entities, std::size_t num_relations,
                   std::size_t num_base_relations)
        : kind_(kind),
          dim_(dim),
          num_relations_(num_relations),
          num_base_(num_base_relations),
          entities_(num_entities * 2 * dim),
          relations_(num_base_relations * (kind == ModelKind::RotatE ? dim : 2 * dim)) {
        if (dim == 0) throw Error("EmbeddingTable: dim must be positive");
        if (num_relations != num_base_relations && num_relations != 2 * num_base_relations)
            throw Error("EmbeddingTable: inconsistent relation counts");
    }

    ModelKind model_kind() const { return kind_; }
    std::size_t dim() const { return dim_; }
    std::size_t num_entities() const { return entities_.size() / (2 * dim_); }
    std::size_t num_relations() const { return num_relations_; }
    std::size_t num_base_relations() const { return num_base_; }
    bool frozen() const { return frozen_; }
    void set_frozen(bool f) { frozen_ = f; }

    ComplexView entity(EntityId e) const {
        const double* p = entities_.value.data() + static_cast<std::size_t>(e) * 2 * dim_;
        return {{p, dim_}, {p + dim_, dim_}};
    }

    /// Base relation id and +1/-1 for forward/inverse.
    std::pair<std::size_t, double> base_and_sign(RelationId r) const {
        const auto idx = static_cast<std::size_t>(r);
        if (idx >= num_relations_) throw Error("EmbeddingTable: relation id out of range");
        return idx >= num_base_ ? std::pair{idx - num_base_, -1.0} : std::pair{idx, 1.0};
    }

    ComplexVec relation(RelationId r) const {
        const auto [b, sign] = base_and_sign(r);
        ComplexVec out(dim_);
        if (kind_ == ModelKind::RotatE) {
            const double* ph = relations_.value.data() + b * dim_;
            for (std::size_t j = 0; j < dim_; ++j) {
                out.re[j] = std::cos(ph[j]);
                out.im[j] = sign * std::sin(ph[j]);
            }
        } else {
            const double* p = relations_.value.data() + b * 2 * dim_;
            for (std::size_t j = 0; j < dim_; ++j) {
                out.re[j] = p[j];
                out.im[j] = sign * p[dim_ + j];
            }
        }
        return out;
    }

    /// RotatE phase vector of relation r (negated for inverses).
    std::vector<double> relation_phase(RelationId r) const {
        if (kind_ != ModelKind::RotatE) throw UnsupportedError("relation_phase: ComplEx table");
        const auto [b, sign] = base_and_sign(r);
        std::vector<double> out(relations_.value.begin() + static_cast<std::ptrdiff_t>(b * dim_),
                                relations_.value.begin() + static_cast<std::ptrdiff_t>((b + 1) * dim_));
        for (double& x : out) x *= sign;
        return out;
    }

    Param& entity_params() { return entities_; }
    Param& relation_params() { return relations_; }
    const Param& entity_params() const { return entities_; }
    const Param& relation_params() const { return relations_; }
    std::size_t relation_row_width() const { return kind_ == ModelKind::RotatE ? dim_ : 2 * dim_; }

    /// Adds an upstream gradient on relation r's complex value into the
    /// underlying parameters.
    void accumulate_relation_grad(RelationId r, std::span<const double> g_re, std::span<const double> g_im) {
        const auto [b, sign] = base_and_sign(r);
        if (kind_ == ModelKind::RotatE) {
            const double* ph = relations_.value.data() + b * dim_;
            double* gp = relations_.grad.data() + b * dim_;
            for (std::size_t j = 0; j < dim_; ++j) {
                const double a = sign * ph[j];
                // d/dphi (cos a, sin a) with a = sign*phi
                gp[j] += sign * (-g_re[j] * std::sin(a) + g_im[j] * std::cos(a));
            }
        } else {
            double* gp = relations_.grad.data() + b * 2 * dim_;
            for (std::size_t j = 0; j < dim_; ++j) {
                gp[j] += g_re[j];
                gp[dim_ + j] += sign * g_im[j];
            }
        }
    }

    double* entity_grad_re(EntityId e) { return entities_.grad.data() + static_cast<std::size_t>(e) * 2 * dim_; }
    double* entity_grad_im(EntityId e) { return entity_grad_re(e) + dim_; }

    void save(BinaryWriter& w) const {
        w.str("TERPKGE1");
        w.str(to_string(kind_));
        w.u64(dim_);
        w.u64(num_entities());
        w.u64(num_relations_);
        w.u64(num_base_);
        w.u64(frozen_ ? 1 : 0);
        entities_.save(w);
        relations_.save(w);
    }

    static EmbeddingTable load(BinaryReader& r) {
        if (r.str() != "TERPKGE1") throw Error("embedding checkpoint: bad header");
        const ModelKind kind = parse_model_kind(r.str());
        const auto dim = r.u64(), ne = r.u64(), nr = r.u64(), nb = r.u64();
        EmbeddingTable t(kind, dim, ne, nr, nb);
        t.frozen_ = r.u64() != 0;
        t.entities_.load(r);
        t.relations_.load(r);
        if (t.entities_.size() != ne * 2 * dim || t.relations_.size() != nb * t.relation_row_width())
            throw Error("embedding checkpoint: size mismatch");
        return t;
    }

    bool same_values(const EmbeddingTable& o) const {
        return kind_ == o.kind_ && dim_ == o.dim_ && num_relations_ == o.num_relations_ && num_base_ == o.num_base_ &&
               entities_.value == o.entities_.value && relations_.value == o.relations_.value;
    }

private:
    ModelKind kind_ = ModelKind::RotatE;
    std::size_t dim_ = 0;
    std::size_t num_relations_ = 0;
    std::size_t num_base_ = 0;
    bool frozen_ = false;
    Param entities_;
    Param relations_;
};

inline void save_embeddings(const EmbeddingTable& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    BinaryWriter w(out);
    t.save(w);
}

inline EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    BinaryReader r(in);
    return EmbeddingTable::load(r);
}

/// Entities uniform in [-a, a] with a = 6/sqrt(2d); RotatE phases uniform
/// in (-pi, pi]; ComplEx relation components uniform in [-a, a].
inline EmbeddingTable init_embeddings(const KnowledgeGraph& kg, const KgeTrainConfig& cfg) {
    if (cfg.dim == 0) throw Error("init_embeddings: dim must be positive");
    EmbeddingTable t(cfg.model_kind, cfg.dim, kg.num_entities(), kg.num_relations(), kg.num_base_relations());
    std::mt19937_64 rng(cfg.seed);
    const double a = 6.0 / std::sqrt(2.0 * static_cast<double>(cfg.dim));
    t.entity_params().fill_uniform(rng, a);
    if (cfg.model_kind == ModelKind::RotatE) {
        std::uniform_real_distribution<double> dist(-std::numbers::pi, std::numbers::pi);
        for (double& x : t.relation_params().value) {
            x = dist(rng);
            if (x == -std::numbers::pi) x = std::numbers::pi;
        }
    } else {
        t.relation_params().fill_uniform(rng, a);
    }
    return t;
}

inline double rotate_score(ComplexView h, ComplexView r, ComplexView t, Norm norm) {
    return rotation_score(h, r, t, norm);
}

inline double complex_score(ComplexView h, ComplexView r, ComplexView t) { return trilinear_score(h, r, t); }

inline double triple_score(const EmbeddingTable& table, const Triple& t, Norm norm) {
    const ComplexVec r = table.relation(t.relation);
    return table.model_kind() == ModelKind::RotatE ? rotate_score(table.entity(t.head), r, table.entity(t.tail), norm)
                                                   : complex_score(table.entity(t.head), r, table.entity(t.tail));
}

/// Left-to-right Hadamard product of the listed relation embeddings. RotatE
/// only: ComplEx has no composition rule.
inline ComplexVec compose_relations(std::span<const RelationId> relation_ids, const EmbeddingTable& table) {
    if (table.model_kind() != ModelKind::RotatE)
        throw UnsupportedError("compose_relations: ComplEx relations do not compose");
    if (relation_ids.empty()) throw Error("compose_relations: empty relation list");
    // A product of unit rotations is the rotation by the summed phases.
    std::vector<double> total(table.dim(), 0.0);
    for (RelationId r : relation_ids) {
        const auto ph = table.relation_phase(r);
        for (std::size_t j = 0; j < total.size(); ++j) total[j] += ph[j];
    }
    ComplexVec out(table.dim());
    for (std::size_t j = 0; j < total.size(); ++j) {
        out.re[j] = std::cos(total[j]);
        out.im[j] = std::sin(total[j]);
    }
    return out;
}

/// Gradient of compose_relations with respect to the relation parameters.
inline void compose_relations_backward(std::span<const RelationId> relation_ids, EmbeddingTable& table,
                                       const ComplexVec& composed, std::span<const double> g_re,
                                       std::span<const double> g_im) {
    // d/dphi_k of exp(i * sum) = i * composed * sign_k
    const std::size_t d = table.dim();
    std::vector<double> dphase(d);
    for (std::size_t j = 0; j < d; ++j) dphase[j] = -g_re[j] * composed.im[j] + g_im[j] * composed.re[j];
    for (RelationId r : relation_ids) {
        const auto [b, sign] = table.base_and_sign(r);
        double* gp = table.relation_params().grad.data() + b * d;
        for (std::size_t j = 0; j < d; ++j) gp[j] += sign * dphase[j];
    }
}

// ---------------------------------------------------------------------------
// Training

namespace detail {

inline double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
inline double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace detail

struct KgeSample {
    Triple positive;
    std::vector<Triple> negatives;
};

inline double kge_score(const EmbeddingTable& table, const Triple& t, const ComplexVec& r, Norm norm) {
    return table.model_kind() == ModelKind::RotatE
               ? rotation_score(table.entity(t.head), r, table.entity(t.tail), norm)
               : trilinear_score(table.entity(t.head), r, table.entity(t.tail));
}

inline void kge_score_backward(EmbeddingTable& table, const Triple& t, const ComplexVec& r, Norm norm,
                               double upstream, std::vector<double>& r_grad_re, std::vector<double>& r_grad_im) {
    RotationGrads g{table.entity_grad_re(t.head), table.entity_grad_im(t.head), r_grad_re.data(),
                    r_grad_im.data(),             table.entity_grad_re(t.tail), table.entity_grad_im(t.tail)};
    if (table.model_kind() == ModelKind::RotatE)
        rotation_score_backward(table.entity(t.head), r, table.entity(t.tail), norm, upstream, g);
    else
        trilinear_score_backward(table.entity(t.head), r, table.entity(t.tail), upstream, g);
}

/// Mean over samples of
///   -log s(margin + f(pos)) - sum_i w_i log s(-margin - f(neg_i)),
/// with w uniform or, for temperature > 0, the softmax of temperature-scaled
/// negative scores (treated as constants). Accumulates gradients into the
/// table when `accumulate` is set.
inline double kge_batch_loss(EmbeddingTable& table, std::span<const KgeSample> batch, const KgeTrainConfig& cfg,
                             bool accumulate) {
    if (batch.empty()) return 0.0;
    const double scale = 1.0 / static_cast<double>(batch.size());
    const std::size_t d = table.dim();
    double total = 0.0;
    std::vector<double> gr(d), gi(d);
    std::vector<double> neg_scores, weights;
    for (const KgeSample& s : batch) {
        const ComplexVec r = table.relation(s.positive.relation);
        std::fill(gr.begin(), gr.end(), 0.0);
        std::fill(gi.begin(), gi.end(), 0.0);
        const double sp = kge_score(table, s.positive, r, cfg.norm);
        total -= scale * detail::log_sigmoid(cfg.margin + sp);
        if (accumulate)
            kge_score_backward(table, s.positive, r, cfg.norm, -scale * detail::sigmoid(-cfg.margin - sp), gr, gi);

        const std::size_t n = s.negatives.size();
        neg_scores.resize(n);
        weights.assign(n, n ? 1.0 / static_cast<double>(n) : 0.0);
        for (std::size_t i = 0; i < n; ++i) neg_scores[i] = kge_score(table, s.negatives[i], r, cfg.norm);
        if (cfg.adversarial_temperature > 0.0 && n > 0) {
            double mx = -1e300;
            for (double x : neg_scores) mx = std::max(mx, cfg.adversarial_temperature * x);
            double z = 0.0;
            for (std::size_t i = 0; i < n; ++i) z += weights[i] = std::exp(cfg.adversarial_temperature * neg_scores[i] - mx);
            for (double& w : weights) w /= z;
        }
        for (std::size_t i = 0; i < n; ++i) {
            total -= scale * weights[i] * detail::log_sigmoid(-cfg.margin - neg_scores[i]);
            if (accumulate)
                kge_score_backward(table, s.negatives[i], r, cfg.norm,
                                   scale * weights[i] * detail::sigmoid(cfg.margin + neg_scores[i]), gr, gi);
        }
        if (accumulate) table.accumulate_relation_grad(s.positive.relation, gr, gi);
    }
    return total;
}

inline std::vector<Triple> forward_triples(const KnowledgeGraph& kg) {
    std::vector<Triple> out;
    for (const Triple& t : kg.triples())
        if (!kg.is_inverse(t.relation)) out.push_back(t);
    return out;
}

struct KgeTrainResult {
    EmbeddingTable table;
    std::vector<double> epoch_losses;
};

/// Negatives corrupt the head or the tail (equal odds) with a uniform entity.
/// On inverse-augmented graphs only forward triples are used since inverse
/// relations share their parameters.
inline KgeTrainResult train_kge_with_history(const KnowledgeGraph& kg, const KgeTrainConfig& cfg) {
    cfg.validate();
    const std::vector<Triple> triples = forward_triples(kg);
    if (triples.empty()) throw Error("train_kge: graph has no triples");
    KgeTrainResult res{init_embeddings(kg, cfg), {}};
    EmbeddingTable& table = res.table;
    std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66Dull);
    std::uniform_int_distribution<EntityId> pick_entity(0, static_cast<EntityId>(kg.num_entities() - 1));
    std::bernoulli_distribution corrupt_head(0.5);
    Adam adam(AdamConfig{cfg.learning_rate, 0.9, 0.998, 1e-8});

    std::vector<std::size_t> order(triples.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<KgeSample> batch;
    std::vector<std::size_t> ent_rows, rel_rows;
    std::vector<char> ent_seen(kg.num_entities()), rel_seen(table.num_base_relations());
    const std::size_t ew = 2 * table.dim(), rw = table.relation_row_width();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t nbatches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            for (std::size_t k = start; k < stop; ++k) {
                KgeSample s{triples[order[k]], {}};
                for (std::size_t i = 0; i < cfg.negatives_per_positive; ++i) {
                    Triple n = s.positive;
                    if (corrupt_head(rng))
                        n.head = pick_entity(rng);
                    else
                        n.tail = pick_entity(rng);
                    s.negatives.push_back(n);
                }
                batch.push_back(std::move(s));
            }
            // collect touched rows so the update stays proportional to the batch
            ent_rows.clear();
            rel_rows.clear();
            auto touch_e = [&](EntityId e) {
                if (!ent_seen[static_cast<std::size_t>(e)]) {
                    ent_seen[static_cast<std::size_t>(e)] = 1;
                    ent_rows.push_back(static_cast<std::size_t>(e));
                }
            };
            for (const auto& s : batch) {
                touch_e(s.positive.head);
                touch_e(s.positive.tail);
                for (const auto& n : s.negatives) {
                    touch_e(n.head);
                    touch_e(n.tail);
                }
                const auto b = table.base_and_sign(s.positive.relation).first;
                if (!rel_seen[b]) {
                    rel_seen[b] = 1;
                    rel_rows.push_back(b);
                }
            }
            for (auto e : ent_rows) std::fill_n(table.entity_params().grad.begin() + static_cast<std::ptrdiff_t>(e * ew), ew, 0.0);
            for (auto b : rel_rows) std::fill_n(table.relation_params().grad.begin() + static_cast<std::ptrdiff_t>(b * rw), rw, 0.0);

            epoch_loss += kge_batch_loss(table, batch, cfg, true);
            ++nbatches;

            adam.begin_step();
            adam.update_rows(table.entity_params(), ent_rows, ew);
            adam.update_rows(table.relation_params(), rel_rows, rw);
            for (auto e : ent_rows) ent_seen[e] = 0;
            for (auto b : rel_rows) rel_seen[b] = 0;
        }
        res.epoch_losses.push_back(epoch_loss / static_cast<double>(nbatches));
    }
    table.relation_params().reset_moments();
    table.entity_params().reset_moments();
    return res;
}

inline EmbeddingTable train_kge(const KnowledgeGraph& kg, const KgeTrainConfig& cfg) {
    return train_kge_with_history(kg, cfg).table;
}

/// 1-based rank of the true tail among all entities, ignoring other tails
/// that also complete (head, relation, ?) in the graph.
inline std::size_t filtered_tail_rank(const EmbeddingTable& table, const KnowledgeGraph& kg, const Triple& t,
                                      Norm norm) {
    const ComplexVec r = table.relation(t.relation);
    const double target = kge_score(table, t, r, norm);
    std::vector<char> other_true(kg.num_entities(), 0);
    for (const Edge& e : kg.out_edges(t.head))
        if (e.relation == t.relation && e.neighbor != t.tail) other_true[static_cast<std::size_t>(e.neighbor)] = 1;
    std::size_t rank = 1;
    for (EntityId c = 0; c < static_cast<EntityId>(kg.num_entities()); ++c) {
        if (c == t.tail || other_true[static_cast<std::size_t>(c)]) continue;
        if (kge_score(table, {t.head, t.relation, c}, r, norm) > target) ++rank;
    }
    return rank;
}

}  // namespace terp
