#pragma once

// Knowledge-graph storage, triple/QA file ingestion, incomplete-KG simulation
// and personalized-PageRank subgraph retrieval.

#include <algorithm>
#include <compare>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "terp/error.hpp"
#include "terp/text_util.hpp"

namespace terp {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
    EntityId head = 0;
    RelationId relation = 0;
    EntityId tail = 0;

    auto operator<=>(const Triple&) const = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const {
        std::uint64_t h = static_cast<std::uint32_t>(t.head);
        h = h * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint32_t>(t.relation);
        h = h * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint32_t>(t.tail);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

/// Bidirectional label <-> dense id map; ids follow first insertion order.
class Vocabulary {
public:
    std::int32_t add(std::string_view label) {
        auto it = index_.find(std::string(label));
        if (it != index_.end()) return it->second;
        const auto id = static_cast<std::int32_t>(labels_.size());
        labels_.emplace_back(label);
        index_.emplace(labels_.back(), id);
        return id;
    }

    std::optional<std::int32_t> find(std::string_view label) const {
        auto it = index_.find(std::string(label));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const std::string& label(std::int32_t id) const { return labels_.at(static_cast<std::size_t>(id)); }
    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }

    bool operator==(const Vocabulary& o) const { return labels_ == o.labels_; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::int32_t> index_;
};

struct Edge {
    RelationId relation;
    EntityId neighbor;
};

/// Immutable after construction. Duplicate triples are dropped, keeping the
/// first occurrence.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    KnowledgeGraph(Vocabulary entities, Vocabulary relations, const std::vector<Triple>& triples,
                   std::size_t num_base_relations = 0)
        : entities_(std::move(entities)),
          relations_(std::move(relations)),
          num_base_relations_(num_base_relations == 0 ? relations_.size() : num_base_relations) {
        if (num_base_relations_ != relations_.size() && num_base_relations_ * 2 != relations_.size())
            throw Error("KnowledgeGraph: inconsistent base relation count");
        std::unordered_set<Triple, TripleHash> seen;
        triples_.reserve(triples.size());
        for (const Triple& t : triples) {
            if (t.head < 0 || static_cast<std::size_t>(t.head) >= entities_.size() || t.tail < 0 ||
                static_cast<std::size_t>(t.tail) >= entities_.size() || t.relation < 0 ||
                static_cast<std::size_t>(t.relation) >= relations_.size())
                throw Error("KnowledgeGraph: triple id out of vocabulary bounds");
            if (seen.insert(t).second) triples_.push_back(t);
        }
        out_adj_.assign(entities_.size(), {});
        in_adj_.assign(entities_.size(), {});
        for (const Triple& t : triples_) {
            out_adj_[static_cast<std::size_t>(t.head)].push_back({t.relation, t.tail});
            in_adj_[static_cast<std::size_t>(t.tail)].push_back({t.relation, t.head});
        }
        hash_ = compute_hash();
    }

    const Vocabulary& entities() const { return entities_; }
    const Vocabulary& relations() const { return relations_; }
    const std::vector<Triple>& triples() const { return triples_; }
    std::size_t num_entities() const { return entities_.size(); }
    std::size_t num_relations() const { return relations_.size(); }
    std::size_t num_base_relations() const { return num_base_relations_; }

    const std::vector<Edge>& out_edges(EntityId e) const { return out_adj_.at(static_cast<std::size_t>(e)); }
    const std::vector<Edge>& in_edges(EntityId e) const { return in_adj_.at(static_cast<std::size_t>(e)); }

    bool is_augmented() const { return relations_.size() == 2 * num_base_relations_ && num_base_relations_ > 0; }
    bool is_inverse(RelationId r) const { return is_augmented() && static_cast<std::size_t>(r) >= num_base_relations_; }
    RelationId base_relation(RelationId r) const {
        return is_inverse(r) ? r - static_cast<RelationId>(num_base_relations_) : r;
    }
    RelationId inverse(RelationId r) const {
        if (!is_augmented()) throw Error("inverse: graph has no inverse relations");
        const auto n = static_cast<RelationId>(num_base_relations_);
        return r >= n ? r - n : r + n;
    }

    /// Relation label with underscores turned into spaces, for text encoders.
    std::string relation_text(RelationId r) const {
        std::string s = relations_.label(r);
        std::replace(s.begin(), s.end(), '_', ' ');
        return s;
    }

    bool valid_entity(EntityId e) const { return e >= 0 && static_cast<std::size_t>(e) < entities_.size(); }

    /// FNV-1a over vocab sizes and triples; keys caches derived from this graph.
    std::uint64_t content_hash() const { return hash_; }

private:
    std::uint64_t compute_hash() const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](std::uint64_t v) {
            for (int b = 0; b < 8; ++b) {
                h ^= (v >> (8 * b)) & 0xFF;
                h *= 1099511628211ull;
            }
        };
        mix(entities_.size());
        mix(relations_.size());
        mix(num_base_relations_);
        for (const Triple& t : triples_) {
            mix(static_cast<std::uint32_t>(t.head));
            mix(static_cast<std::uint32_t>(t.relation));
            mix(static_cast<std::uint32_t>(t.tail));
        }
        return h;
    }

    Vocabulary entities_;
    Vocabulary relations_;
    std::vector<Triple> triples_;
    std::vector<std::vector<Edge>> out_adj_;
    std::vector<std::vector<Edge>> in_adj_;
    std::size_t num_base_relations_ = 0;
    std::uint64_t hash_ = 0;
};

inline KnowledgeGraph parse_triples(std::istream& in, const std::string& source) {
    Vocabulary entities, relations;
    std::vector<Triple> triples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line, '\t');
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty())
            throw ParseError(source, lineno, "expected head<TAB>relation<TAB>tail");
        const EntityId h = entities.add(fields[0]);
        const RelationId r = relations.add(fields[1]);
        const EntityId t = entities.add(fields[2]);
        triples.push_back({h, r, t});
    }
    if (triples.empty()) throw Error(source + ": no triples");
    return KnowledgeGraph(std::move(entities), std::move(relations), triples);
}

inline KnowledgeGraph load_triples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open triples file: " + path);
    return parse_triples(in, path);
}

/// Writes forward triples only; inverse relations are a derived view.
inline void save_triples(const KnowledgeGraph& kg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write triples file: " + path);
    for (const Triple& t : kg.triples()) {
        if (kg.is_inverse(t.relation)) continue;
        out << kg.entities().label(t.head) << '\t' << kg.relations().label(t.relation) << '\t'
            << kg.entities().label(t.tail) << '\n';
    }
}

/// Adds r^-1 for every relation r with id r + |R| and label "<r> (reversed)".
inline KnowledgeGraph add_inverse_relations(const KnowledgeGraph& kg) {
    if (kg.is_augmented()) throw Error("add_inverse_relations: graph already augmented");
    Vocabulary relations = kg.relations();
    const auto n = static_cast<RelationId>(kg.num_relations());
    for (RelationId r = 0; r < n; ++r) relations.add(kg.relations().label(r) + " (reversed)");
    if (relations.size() != 2 * kg.num_relations())
        throw Error("add_inverse_relations: relation label collision");
    std::vector<Triple> triples = kg.triples();
    triples.reserve(2 * triples.size());
    for (const Triple& t : kg.triples()) triples.push_back({t.tail, t.relation + n, t.head});
    return KnowledgeGraph(kg.entities(), std::move(relations), triples, kg.num_relations());
}

/// Removes round(fraction * |triples|) triples uniformly at random. On an
/// inverse-augmented graph the forward triples are sampled and mirrors
/// follow them.
inline KnowledgeGraph drop_edges(const KnowledgeGraph& kg, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error("drop_edges: fraction must be in [0,1]");
    std::vector<Triple> forward;
    for (const Triple& t : kg.triples())
        if (!kg.is_inverse(t.relation)) forward.push_back(t);
    const auto n = forward.size();
    const auto n_drop = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> dropped(n, false);
    for (std::size_t i = 0; i < n_drop; ++i) dropped[order[i]] = true;
    std::vector<Triple> kept;
    for (std::size_t i = 0; i < n; ++i)
        if (!dropped[i]) kept.push_back(forward[i]);
    if (kg.is_augmented()) {
        const auto nb = static_cast<RelationId>(kg.num_base_relations());
        const std::size_t m = kept.size();
        for (std::size_t i = 0; i < m; ++i) kept.push_back({kept[i].tail, kept[i].relation + nb, kept[i].head});
    }
    return KnowledgeGraph(kg.entities(), kg.relations(), kept, kg.num_base_relations());
}

// ---------------------------------------------------------------------------
// Question data

struct QuestionInstance {
    std::string text;
    std::vector<std::int32_t> tokens;  // filled by the tokenizer
    std::vector<EntityId> topic_entities;
    std::vector<EntityId> answers;
    std::optional<int> hop_annotation;
};

struct QaDataset {
    std::vector<QuestionInstance> instances;
    std::size_t skipped = 0;
};

/// Bracketed spans of a MetaQA-style question, in order of appearance.
inline std::vector<std::string> bracketed_mentions(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = text.find('[', pos)) != std::string_view::npos) {
        const auto close = text.find(']', pos + 1);
        if (close == std::string_view::npos) break;
        out.emplace_back(text.substr(pos + 1, close - pos - 1));
        pos = close + 1;
    }
    return out;
}

namespace detail {

inline bool resolve_labels(const KnowledgeGraph& kg, const std::vector<std::string>& labels,
                           std::vector<EntityId>& out) {
    for (const auto& label : labels) {
        auto id = kg.entities().find(label);
        if (!id) return false;
        if (std::find(out.begin(), out.end(), *id) == out.end()) out.push_back(*id);
    }
    return !out.empty();
}

inline std::optional<int> parse_hop(const std::string& field, const std::string& source, std::size_t lineno) {
    if (field.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        int hop = std::stoi(field, &used);
        if (used != field.size() || hop <= 0) throw std::invalid_argument(field);
        return hop;
    } catch (const std::exception&) {
        throw ParseError(source, lineno, "hop annotation must be a positive integer");
    }
}

}  // namespace detail

/// question<TAB>answer1|answer2[<TAB>hops]; topic entities are the
/// bracketed spans of the question. Unresolvable lines are skipped and
/// counted.
inline QaDataset load_qa(const std::string& path, const KnowledgeGraph& kg) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open QA file: " + path);
    QaDataset ds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line, '\t');
        if (fields.size() < 2 || fields.size() > 3) throw ParseError(path, lineno, "expected question<TAB>answers");
        QuestionInstance q;
        q.text = fields[0];
        if (fields.size() == 3) q.hop_annotation = detail::parse_hop(fields[2], path, lineno);
        if (!detail::resolve_labels(kg, bracketed_mentions(q.text), q.topic_entities) ||
            !detail::resolve_labels(kg, split(fields[1], '|'), q.answers)) {
            ++ds.skipped;
            continue;
        }
        ds.instances.push_back(std::move(q));
    }
    if (ds.instances.empty()) throw Error(path + ": no parsable QA instances");
    return ds;
}

/// question<TAB>topic1|topic2<TAB>answer1|answer2[<TAB>hops], for datasets
/// without in-text entity markup.
inline QaDataset load_qa_explicit(const std::string& path, const KnowledgeGraph& kg) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open QA file: " + path);
    QaDataset ds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line, '\t');
        if (fields.size() < 3 || fields.size() > 4)
            throw ParseError(path, lineno, "expected question<TAB>topics<TAB>answers");
        QuestionInstance q;
        q.text = fields[0];
        if (fields.size() == 4) q.hop_annotation = detail::parse_hop(fields[3], path, lineno);
        if (!detail::resolve_labels(kg, split(fields[1], '|'), q.topic_entities) ||
            !detail::resolve_labels(kg, split(fields[2], '|'), q.answers)) {
            ++ds.skipped;
            continue;
        }
        ds.instances.push_back(std::move(q));
    }
    if (ds.instances.empty()) throw Error(path + ": no parsable QA instances");
    return ds;
}

// ---------------------------------------------------------------------------
// Personalized PageRank

struct Subgraph {
    std::vector<EntityId> entity_ids;  // ascending
    bool recall_flag = false;

    bool contains(EntityId e) const { return std::binary_search(entity_ids.begin(), entity_ids.end(), e); }
    std::size_t size() const { return entity_ids.size(); }
};

struct PprConfig {
    double restart_prob = 0.8;
    std::size_t max_entities = 2000;
    std::size_t iterations = 20;
};

struct PprScores {
    std::vector<double> scores;
    std::vector<double> mass_per_iteration;  // sum of scores after each step
};

/// Power iteration over the undirected adjacency, restarting uniformly on the
/// seeds. Mass at isolated nodes is returned to the restart distribution so
/// the score vector stays a distribution.
inline PprScores personalized_pagerank(const KnowledgeGraph& kg, const std::vector<EntityId>& seeds,
                                       double restart_prob, std::size_t iterations) {
    if (seeds.empty()) throw Error("ppr: empty seed set");
    if (!(restart_prob >= 0.0 && restart_prob <= 1.0)) throw Error("ppr: restart_prob must be in [0,1]");
    const std::size_t n = kg.num_entities();
    std::vector<double> restart(n, 0.0);
    std::set<EntityId> unique(seeds.begin(), seeds.end());
    for (EntityId s : unique) {
        if (!kg.valid_entity(s)) throw Error("ppr: invalid seed id");
        restart[static_cast<std::size_t>(s)] = 1.0 / static_cast<double>(unique.size());
    }
    std::vector<std::size_t> degree(n, 0);
    for (const Triple& t : kg.triples()) {
        ++degree[static_cast<std::size_t>(t.head)];
        ++degree[static_cast<std::size_t>(t.tail)];
    }
    PprScores out;
    out.scores = restart;
    std::vector<double> next(n);
    for (std::size_t it = 0; it < iterations; ++it) {
        double dangling = 0.0;
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t u = 0; u < n; ++u)
            if (degree[u] == 0) dangling += out.scores[u];
        for (const Triple& t : kg.triples()) {
            const auto h = static_cast<std::size_t>(t.head);
            const auto tl = static_cast<std::size_t>(t.tail);
            next[tl] += (1.0 - restart_prob) * out.scores[h] / static_cast<double>(degree[h]);
            next[h] += (1.0 - restart_prob) * out.scores[tl] / static_cast<double>(degree[tl]);
        }
        const double restart_mass = restart_prob + (1.0 - restart_prob) * dangling;
        double sum = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            next[v] += restart_mass * restart[v];
            sum += next[v];
        }
        out.scores.swap(next);
        out.mass_per_iteration.push_back(sum);
    }
    return out;
}

/// Seeds plus the highest-scoring entities up to max_entities; equal scores
/// are taken in ascending id order.
inline Subgraph ppr_subgraph(const KnowledgeGraph& kg, const std::vector<EntityId>& seeds, const PprConfig& cfg) {
    if (cfg.max_entities == 0) throw Error("ppr: max_entities must be positive");
    if (cfg.iterations == 0) throw Error("ppr: iterations must be positive");
    const PprScores ppr = personalized_pagerank(kg, seeds, cfg.restart_prob, cfg.iterations);
    std::set<EntityId> unique(seeds.begin(), seeds.end());
    if (unique.size() > cfg.max_entities) throw Error("ppr: more seeds than max_entities");
    std::vector<EntityId> order(kg.num_entities());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](EntityId a, EntityId b) {
        return ppr.scores[static_cast<std::size_t>(a)] > ppr.scores[static_cast<std::size_t>(b)];
    });
    std::vector<EntityId> chosen(unique.begin(), unique.end());
    for (EntityId e : order) {
        if (chosen.size() >= cfg.max_entities) break;
        if (!unique.count(e)) chosen.push_back(e);
    }
    std::sort(chosen.begin(), chosen.end());
    Subgraph sg;
    sg.entity_ids = std::move(chosen);
    return sg;
}

inline Subgraph ppr_subgraph(const KnowledgeGraph& kg, const std::vector<EntityId>& seeds,
                             const std::vector<EntityId>& answers, const PprConfig& cfg) {
    Subgraph sg = ppr_subgraph(kg, seeds, cfg);
    sg.recall_flag = std::all_of(answers.begin(), answers.end(), [&](EntityId a) { return sg.contains(a); });
    return sg;
}

/// Subgraph holding every entity of the graph.
inline Subgraph full_subgraph(const KnowledgeGraph& kg, const std::vector<EntityId>& answers = {}) {
    Subgraph sg;
    sg.entity_ids.resize(kg.num_entities());
    std::iota(sg.entity_ids.begin(), sg.entity_ids.end(), 0);
    sg.recall_flag = std::all_of(answers.begin(), answers.end(), [&](EntityId a) { return kg.valid_entity(a); });
    return sg;
}

}  // namespace terp
