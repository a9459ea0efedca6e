#pragma once

// Exhaustive walk enumeration, used as the reference for shortest paths.

#include <random>
#include <set>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "terp/paths.hpp"

namespace terp::testing {

/// Every relation-label sequence of the shortest length (<= max_len) whose
/// walk goes from h to c, sorted. Tries all walks, no pruning.
inline std::vector<RelationPath> brute_force_shortest(const KnowledgeGraph& kg, EntityId h, EntityId c,
                                                      std::size_t max_len) {
    if (h == c) return {};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::set<std::vector<RelationId>> found;
        std::vector<RelationId> labels;
        auto walk = [&](auto&& self, EntityId at) -> void {
            if (labels.size() == len) {
                if (at == c) found.insert(labels);
                return;
            }
            for (const Edge& e : kg.out_edges(at)) {
                labels.push_back(e.relation);
                self(self, e.neighbor);
                labels.pop_back();
            }
        };
        walk(walk, h);
        if (!found.empty()) {
            std::vector<RelationPath> out;
            for (const auto& f : found) out.push_back({f});
            return out;
        }
    }
    return {};
}

/// Random multigraph with up to `max_nodes` nodes, optionally augmented.
inline KnowledgeGraph random_graph(std::mt19937_64& rng, int max_nodes = 12) {
    std::uniform_int_distribution<int> nn(3, max_nodes), nr(1, 3);
    const int n = nn(rng), r = nr(rng);
    std::uniform_int_distribution<int> pe(0, n - 1), pr(0, r - 1), ne(n, 3 * n);
    std::vector<std::tuple<int, int, int>> ts;
    const int edges = ne(rng);
    for (int i = 0; i < edges; ++i) ts.push_back({pe(rng), pr(rng), pe(rng)});
    std::vector<std::string> ents, rels;
    for (int i = 0; i < n; ++i) ents.push_back("v" + std::to_string(i));
    for (int i = 0; i < r; ++i) rels.push_back("r" + std::to_string(i));
    auto kg = make_graph(ents, rels, ts);
    return std::bernoulli_distribution(0.5)(rng) ? add_inverse_relations(kg) : kg;
}

struct OracleMismatch {
    EntityId h = 0, c = 0;
    std::size_t got = 0, want = 0;
};

/// Compares enumerate_shortest_paths (and the cached per-source tables)
/// against the brute force for every ordered pair of one graph.
inline std::vector<OracleMismatch> compare_with_oracle(const KnowledgeGraph& kg, std::size_t max_len) {
    std::vector<OracleMismatch> bad;
    PathCache cache(max_len, 1u << 20);
    for (EntityId h = 0; h < static_cast<EntityId>(kg.num_entities()); ++h) {
        const auto table = cache.from(kg, h);
        for (EntityId c = 0; c < static_cast<EntityId>(kg.num_entities()); ++c) {
            const auto want = brute_force_shortest(kg, h, c, max_len);
            const auto got = enumerate_shortest_paths(kg, h, c, max_len, 1u << 20);
            const auto& cached = (*table)[static_cast<std::size_t>(c)];
            if (got != want || cached != want) bad.push_back({h, c, got.size(), want.size()});
        }
    }
    return bad;
}

}  // namespace terp::testing
