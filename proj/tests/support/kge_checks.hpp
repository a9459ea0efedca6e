#pragma once

// Training configs and measurements for the small KGE sanity graphs.

#include <cmath>

#include "terp/kge.hpp"

namespace terp::testing {

inline KgeTrainConfig cycle_config() {
    KgeTrainConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 200;
    cfg.learning_rate = 0.05;
    cfg.negatives_per_positive = 32;
    cfg.batch_size = 4;
    cfg.margin = 3.0;
    return cfg;
}

inline KgeTrainConfig composition_config(std::uint64_t seed) {
    KgeTrainConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 300;
    cfg.learning_rate = 0.02;
    cfg.negatives_per_positive = 16;
    cfg.batch_size = 32;
    cfg.margin = 6.0;
    cfg.seed = seed;
    return cfg;
}

/// Mean filtered rank of every true tail.
inline double mean_filtered_rank(const EmbeddingTable& table, const KnowledgeGraph& kg, Norm norm) {
    double sum = 0.0;
    for (const Triple& t : kg.triples()) sum += static_cast<double>(filtered_tail_rank(table, kg, t, norm));
    return sum / static_cast<double>(kg.triples().size());
}

/// Mean over components of |wrap(phase(a) + phase(b) - phase(c))|.
inline double composition_error(const EmbeddingTable& table, RelationId a, RelationId b, RelationId c) {
    const auto pa = table.relation_phase(a), pb = table.relation_phase(b), pc = table.relation_phase(c);
    double sum = 0.0;
    for (std::size_t j = 0; j < pa.size(); ++j) sum += std::abs(wrap_angle(pa[j] + pb[j] - pc[j]));
    return sum / static_cast<double>(pa.size());
}

}  // namespace terp::testing
