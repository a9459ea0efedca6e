#pragma once

// Small graphs and models shared by unit and acceptance tests.

#include <random>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "terp/kge.hpp"
#include "terp/knowledge_graph.hpp"
#include "terp/model.hpp"

namespace terp::testing {

inline KnowledgeGraph make_graph(const std::vector<std::string>& entities, const std::vector<std::string>& relations,
                                 const std::vector<std::tuple<int, int, int>>& triples) {
    Vocabulary ents, rels;
    for (const auto& e : entities) ents.add(e);
    for (const auto& r : relations) rels.add(r);
    std::vector<Triple> ts;
    for (auto [h, r, t] : triples) ts.push_back({h, r, t});
    return KnowledgeGraph(std::move(ents), std::move(rels), ts);
}

/// A small family graph with parallel and 2-hop connections.
inline KnowledgeGraph family_graph() {
    return make_graph({"ann", "bob", "cid", "dora", "acme", "paris", "france", "eve"},
                      {"parent", "works_for", "lives_in", "in_country"},
                      {{1, 0, 0}, {2, 0, 1}, {3, 0, 1}, {0, 1, 4}, {1, 1, 4}, {2, 2, 5}, {4, 2, 5}, {5, 3, 6},
                       {7, 2, 5}, {3, 1, 4}});
}

inline QuestionInstance question(const KnowledgeGraph& kg, std::string text, std::vector<std::string> topics,
                                 std::vector<std::string> answers) {
    QuestionInstance q;
    q.text = std::move(text);
    for (const auto& t : topics) q.topic_entities.push_back(*kg.entities().find(t));
    for (const auto& a : answers) q.answers.push_back(*kg.entities().find(a));
    return q;
}

/// e0 -> e1 -> e2 -> e3 -> e0 under a single relation.
inline KnowledgeGraph cycle_graph() {
    return make_graph({"e0", "e1", "e2", "e3"}, {"next"}, {{0, 0, 1}, {1, 0, 2}, {2, 0, 3}, {3, 0, 0}});
}

/// Random r1 and r2 edges plus r3 = r1 then r2 for every such chain, so r3
/// is exactly closed under composition.
inline KnowledgeGraph compositional_graph(std::uint64_t seed, int entities = 40, int edges_per_rel = 60) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, entities - 1);
    std::set<std::tuple<int, int, int>> ts;
    while (static_cast<int>(ts.size()) < edges_per_rel) {
        const int h = pick(rng), t = pick(rng);
        if (h != t) ts.insert({h, 0, t});
    }
    while (static_cast<int>(ts.size()) < 2 * edges_per_rel) {
        const int h = pick(rng), t = pick(rng);
        if (h != t) ts.insert({h, 1, t});
    }
    std::vector<std::tuple<int, int, int>> base(ts.begin(), ts.end());
    for (auto [a, r1, b] : base) {
        if (r1 != 0) continue;
        for (auto [b2, r2, c] : base)
            if (r2 == 1 && b2 == b) ts.insert({a, 2, c});
    }
    std::vector<std::string> names;
    for (int i = 0; i < entities; ++i) names.push_back("n" + std::to_string(i));
    return make_graph(names, {"r1", "r2", "r3"}, {ts.begin(), ts.end()});
}

/// Untrained model over the family graph with random embeddings.
inline TerpModel small_model(HeadKind head = HeadKind::RotateScale, std::size_t dim = 4, std::uint64_t seed = 1,
                             PathFeatures features = PathFeatures::Both) {
    KnowledgeGraph kg = add_inverse_relations(family_graph());
    KgeTrainConfig kc;
    kc.dim = dim;
    kc.seed = seed;
    kc.model_kind = head == HeadKind::Complex ? ModelKind::ComplEx : ModelKind::RotatE;
    EmbeddingTable table = init_embeddings(kg, kc);
    std::vector<QuestionInstance> qs{question(kg, "who is the parent of [cid]", {"cid"}, {"bob"}),
                                     question(kg, "which country does [cid] live in", {"cid"}, {"france"})};
    ModelConfig mc;
    mc.head = head;
    mc.features = features;
    mc.seed = seed;
    mc.token_init = 0.5;
    Tokenizer tok = build_tokenizer(kg, qs, true);
    return TerpModel(std::move(kg), std::move(table), std::move(tok), mc);
}

}  // namespace terp::testing
