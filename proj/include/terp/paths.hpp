#pragma once

// Shortest relation-path enumeration between entities, the hybrid
// (textual + structural) path representation and question-conditioned
// attention over the candidate paths of an entity pair.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "terp/complex.hpp"
#include "terp/error.hpp"
#include "terp/knowledge_graph.hpp"
#include "terp/nn.hpp"

namespace terp {

struct RelationPath {
    std::vector<RelationId> steps;

    std::size_t length() const { return steps.size(); }
    auto operator<=>(const RelationPath&) const = default;
};

namespace detail {

inline std::vector<int> bfs_depths(const KnowledgeGraph& kg, EntityId source, std::size_t max_len,
                                   EntityId stop_at = -1) {
    std::vector<int> dist(kg.num_entities(), -1);
    dist[static_cast<std::size_t>(source)] = 0;
    std::vector<EntityId> frontier{source}, next;
    for (std::size_t depth = 1; depth <= max_len && !frontier.empty(); ++depth) {
        next.clear();
        for (EntityId u : frontier)
            for (const Edge& e : kg.out_edges(u)) {
                auto& dv = dist[static_cast<std::size_t>(e.neighbor)];
                if (dv < 0) {
                    dv = static_cast<int>(depth);
                    next.push_back(e.neighbor);
                }
            }
        if (stop_at >= 0 && dist[static_cast<std::size_t>(stop_at)] >= 0) break;
        frontier.swap(next);
    }
    return dist;
}

/// Walks label prefixes in increasing relation-id order. `state` is the set
/// of nodes reachable from the source by the current prefix along edges that
/// advance the BFS depth by one; `admit` filters nodes allowed at a depth.
template <typename Admit, typename Visit>
void enumerate_label_prefixes(const KnowledgeGraph& kg, const std::vector<int>& dist, std::vector<EntityId> state,
                              std::vector<RelationId>& prefix, std::size_t max_len, Admit&& admit, Visit&& visit) {
    const int depth = static_cast<int>(prefix.size());
    if (!prefix.empty() && !visit(prefix, state)) return;
    if (prefix.size() >= max_len) return;
    std::map<RelationId, std::vector<EntityId>> branches;
    for (EntityId u : state)
        for (const Edge& e : kg.out_edges(u))
            if (dist[static_cast<std::size_t>(e.neighbor)] == depth + 1 && admit(e.neighbor, depth + 1))
                branches[e.relation].push_back(e.neighbor);
    for (auto& [rel, nodes] : branches) {
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        prefix.push_back(rel);
        enumerate_label_prefixes(kg, dist, std::move(nodes), prefix, max_len, admit, visit);
        prefix.pop_back();
    }
}

}  // namespace detail

/// All distinct relation-label walks of minimal length L <= max_len from h
/// to c, lexicographically ordered by relation id and capped at max_paths.
/// Empty when h == c or c is not reachable within max_len.
inline std::vector<RelationPath> enumerate_shortest_paths(const KnowledgeGraph& kg, EntityId h, EntityId c,
                                                          std::size_t max_len, std::size_t max_paths) {
    if (!kg.valid_entity(h) || !kg.valid_entity(c)) throw Error("enumerate_shortest_paths: invalid entity id");
    std::vector<RelationPath> out;
    if (h == c || max_paths == 0) return out;
    const auto dist = detail::bfs_depths(kg, h, max_len, c);
    const int L = dist[static_cast<std::size_t>(c)];
    if (L < 0) return out;

    // nodes lying on some shortest h->c walk
    std::vector<char> on_path(kg.num_entities(), 0);
    on_path[static_cast<std::size_t>(c)] = 1;
    std::vector<EntityId> layer{c}, prev;
    for (int depth = L; depth > 1; --depth) {
        prev.clear();
        for (EntityId v : layer)
            for (const Edge& e : kg.in_edges(v)) {
                const auto u = static_cast<std::size_t>(e.neighbor);
                if (dist[u] == depth - 1 && !on_path[u]) {
                    on_path[u] = 1;
                    prev.push_back(e.neighbor);
                }
            }
        layer.swap(prev);
    }
    std::vector<RelationId> prefix;
    detail::enumerate_label_prefixes(
        kg, dist, {h}, prefix, static_cast<std::size_t>(L),
        [&](EntityId v, int) { return on_path[static_cast<std::size_t>(v)] != 0; },
        [&](const std::vector<RelationId>& p, const std::vector<EntityId>& state) {
            if (out.size() >= max_paths) return false;
            if (static_cast<int>(p.size()) == L && std::binary_search(state.begin(), state.end(), c))
                out.push_back({p});
            return out.size() < max_paths;
        });
    return out;
}

/// Shortest paths from one source to every entity within max_len, indexed by
/// entity id. Equivalent to calling enumerate_shortest_paths per target.
inline std::vector<std::vector<RelationPath>> shortest_paths_from(const KnowledgeGraph& kg, EntityId h,
                                                                  std::size_t max_len, std::size_t max_paths) {
    if (!kg.valid_entity(h)) throw Error("shortest_paths_from: invalid entity id");
    std::vector<std::vector<RelationPath>> out(kg.num_entities());
    const auto dist = detail::bfs_depths(kg, h, max_len);
    std::vector<RelationId> prefix;
    detail::enumerate_label_prefixes(
        kg, dist, {h}, prefix, max_len, [](EntityId, int) { return true; },
        [&](const std::vector<RelationId>& p, const std::vector<EntityId>& state) {
            for (EntityId v : state) {
                auto& paths = out[static_cast<std::size_t>(v)];
                if (paths.size() < max_paths) paths.push_back({p});
            }
            return true;
        });
    return out;
}

/// Memoized shortest paths per source entity, tied to one graph version.
/// Safe for concurrent use.
class PathCache {
public:
    using Table = std::vector<std::vector<RelationPath>>;

    PathCache(std::size_t max_len = 3, std::size_t max_paths = 32) : max_len_(max_len), max_paths_(max_paths) {}

    PathCache(const PathCache& o) : max_len_(o.max_len_), max_paths_(o.max_paths_) {}
    PathCache& operator=(const PathCache& o) {
        if (this != &o) {
            std::lock_guard lock(mu_);
            max_len_ = o.max_len_;
            max_paths_ = o.max_paths_;
            cache_.clear();
        }
        return *this;
    }

    std::shared_ptr<const Table> from(const KnowledgeGraph& kg, EntityId h) {
        std::lock_guard lock(mu_);
        if (kg.content_hash() != graph_hash_) {
            cache_.clear();
            graph_hash_ = kg.content_hash();
        }
        auto it = cache_.find(h);
        if (it != cache_.end()) return it->second;
        auto table = std::make_shared<const Table>(shortest_paths_from(kg, h, max_len_, max_paths_));
        cache_.emplace(h, table);
        return table;
    }

    const std::vector<RelationPath>& paths(const KnowledgeGraph& kg, EntityId h, EntityId c,
                                           std::shared_ptr<const Table>& holder) {
        holder = from(kg, h);
        return (*holder)[static_cast<std::size_t>(c)];
    }

    std::size_t max_len() const { return max_len_; }
    std::size_t max_paths() const { return max_paths_; }

private:
    std::size_t max_len_;
    std::size_t max_paths_;
    std::mutex mu_;
    std::uint64_t graph_hash_ = 0;
    std::unordered_map<EntityId, std::shared_ptr<const Table>> cache_;
};

// ---------------------------------------------------------------------------
// Hybrid path representation

enum class PathFeatures { Both, TextualOnly, StructuralOnly };

inline const char* to_string(PathFeatures f) {
    switch (f) {
        case PathFeatures::Both: return "both";
        case PathFeatures::TextualOnly: return "textual_only";
        case PathFeatures::StructuralOnly: return "structural_only";
    }
    return "?";
}

inline PathFeatures parse_path_features(const std::string& s) {
    if (s == "both") return PathFeatures::Both;
    if (s == "textual_only") return PathFeatures::TextualOnly;
    if (s == "structural_only") return PathFeatures::StructuralOnly;
    throw Error("unknown path feature set: " + s);
}

/// FFN over [p_t ; re(p_l) ; im(p_l)]: hidden 2 * text_width with ReLU, linear
/// output of text_width. The masked feature group is zeroed at the input.
class PathFusion {
public:
    PathFusion() = default;
    PathFusion(std::size_t text_width, std::size_t complex_dim, PathFeatures features = PathFeatures::Both)
        : text_width_(text_width),
          complex_dim_(complex_dim),
          features_(features),
          ffn_(text_width + 2 * complex_dim, 2 * text_width, text_width) {}

    void init(std::mt19937_64& rng) { ffn_.init(rng); }

    struct Cache {
        std::vector<double> input;
        FfnCache ffn;
    };

    std::vector<double> make_input(std::span<const double> p_t, ComplexView p_l) const {
        if (p_t.size() != text_width_ || p_l.dim() != complex_dim_ || p_l.im.size() != complex_dim_)
            throw DimensionError("fuse_path: dimension mismatch");
        std::vector<double> x(text_width_ + 2 * complex_dim_, 0.0);
        if (features_ != PathFeatures::StructuralOnly) std::copy(p_t.begin(), p_t.end(), x.begin());
        if (features_ != PathFeatures::TextualOnly) {
            std::copy(p_l.re.begin(), p_l.re.end(), x.begin() + static_cast<std::ptrdiff_t>(text_width_));
            std::copy(p_l.im.begin(), p_l.im.end(),
                      x.begin() + static_cast<std::ptrdiff_t>(text_width_ + complex_dim_));
        }
        return x;
    }

    Cache forward(std::span<const double> p_t, ComplexView p_l) const {
        Cache c;
        c.input = make_input(p_t, p_l);
        c.ffn = ffn_.forward(c.input);
        return c;
    }

    std::vector<double> operator()(std::span<const double> p_t, ComplexView p_l) const {
        return forward(p_t, p_l).ffn.output;
    }

    /// Gradients with respect to p_t (text_width) and p_l (re then im).
    void backward(const Cache& c, std::span<const double> dout, std::span<double> d_pt, std::span<double> d_pl_re,
                  std::span<double> d_pl_im) {
        std::vector<double> dx(c.input.size(), 0.0);
        ffn_.backward(c.input, c.ffn, dout, dx);
        if (features_ != PathFeatures::StructuralOnly && !d_pt.empty())
            for (std::size_t k = 0; k < text_width_; ++k) d_pt[k] += dx[k];
        if (features_ != PathFeatures::TextualOnly) {
            if (!d_pl_re.empty())
                for (std::size_t j = 0; j < complex_dim_; ++j) d_pl_re[j] += dx[text_width_ + j];
            if (!d_pl_im.empty())
                for (std::size_t j = 0; j < complex_dim_; ++j) d_pl_im[j] += dx[text_width_ + complex_dim_ + j];
        }
    }

    PathFeatures features() const { return features_; }
    void set_features(PathFeatures f) { features_ = f; }
    std::size_t text_width() const { return text_width_; }
    std::size_t complex_dim() const { return complex_dim_; }
    Ffn& ffn() { return ffn_; }
    const Ffn& ffn() const { return ffn_; }
    void params(std::vector<Param*>& out) { ffn_.params(out); }

    void save(BinaryWriter& w) const {
        w.u64(text_width_);
        w.u64(complex_dim_);
        w.str(to_string(features_));
        ffn_.save(w);
    }
    void load(BinaryReader& r) {
        text_width_ = r.u64();
        complex_dim_ = r.u64();
        features_ = parse_path_features(r.str());
        ffn_.load(r);
    }

private:
    std::size_t text_width_ = 0;
    std::size_t complex_dim_ = 0;
    PathFeatures features_ = PathFeatures::Both;
    Ffn ffn_;
};

inline std::vector<double> fuse_path(std::span<const double> p_t, ComplexView p_l, const PathFusion& fusion) {
    return fusion(p_t, p_l);
}

/// Scaled dot-product attention with a single query: queries and keys come
/// from the question and the textual path reps, values are the hybrid reps.
class PathAttention {
public:
    PathAttention() = default;
    PathAttention(std::size_t in_width, std::size_t att_width)
        : in_(in_width), att_(att_width), w1_(in_width * att_width), w2_(in_width * att_width) {}

    void init(std::mt19937_64& rng) {
        const double b = std::sqrt(6.0 / static_cast<double>(in_ + att_));
        w1_.fill_uniform(rng, b);
        w2_.fill_uniform(rng, b);
    }

    struct Cache {
        std::vector<double> query;               // W1 q
        std::vector<std::vector<double>> keys;   // W2 p_t,i
        std::vector<double> weights;
        std::vector<double> output;
    };

    Cache forward(std::span<const double> q, const std::vector<std::span<const double>>& textual,
                  const std::vector<std::span<const double>>& hybrid) const {
        if (textual.empty() || textual.size() != hybrid.size()) throw Error("attend_paths: empty or ragged bundle");
        if (q.size() != in_) throw DimensionError("attend_paths: query width mismatch");
        Cache c;
        c.query = project(w1_, q);
        const double scale = 1.0 / std::sqrt(static_cast<double>(att_));
        std::vector<double> logits(textual.size());
        for (std::size_t i = 0; i < textual.size(); ++i) {
            if (textual[i].size() != in_) throw DimensionError("attend_paths: key width mismatch");
            c.keys.push_back(project(w2_, textual[i]));
            double dot = 0.0;
            for (std::size_t a = 0; a < att_; ++a) dot += c.query[a] * c.keys[i][a];
            logits[i] = dot * scale;
        }
        const double mx = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        c.weights.resize(logits.size());
        for (std::size_t i = 0; i < logits.size(); ++i) z += c.weights[i] = std::exp(logits[i] - mx);
        for (double& w : c.weights) w /= z;
        const std::size_t out_w = hybrid[0].size();
        c.output.assign(out_w, 0.0);
        for (std::size_t i = 0; i < hybrid.size(); ++i) {
            if (hybrid[i].size() != out_w) throw DimensionError("attend_paths: value width mismatch");
            for (std::size_t k = 0; k < out_w; ++k) c.output[k] += c.weights[i] * hybrid[i][k];
        }
        return c;
    }

    /// Accumulates parameter gradients and adds input gradients into dq,
    /// d_textual[i] and d_hybrid[i].
    void backward(std::span<const double> q, const std::vector<std::span<const double>>& textual,
                  const std::vector<std::span<const double>>& hybrid, const Cache& c, std::span<const double> dout,
                  std::span<double> dq, std::vector<std::vector<double>>& d_textual,
                  std::vector<std::vector<double>>& d_hybrid) {
        const std::size_t n = hybrid.size();
        const double scale = 1.0 / std::sqrt(static_cast<double>(att_));
        std::vector<double> dw(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < dout.size(); ++k) {
                d_hybrid[i][k] += c.weights[i] * dout[k];
                dw[i] += dout[k] * hybrid[i][k];
            }
        }
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += c.weights[i] * dw[i];
        std::vector<double> dquery(att_, 0.0), dkey(att_);
        for (std::size_t i = 0; i < n; ++i) {
            const double dlogit = c.weights[i] * (dw[i] - mean) * scale;
            if (dlogit == 0.0) continue;
            for (std::size_t a = 0; a < att_; ++a) {
                dquery[a] += dlogit * c.keys[i][a];
                dkey[a] = dlogit * c.query[a];
            }
            project_backward(w2_, textual[i], dkey, d_textual[i]);
        }
        project_backward(w1_, q, dquery, dq);
    }

    std::size_t in_width() const { return in_; }
    std::size_t att_width() const { return att_; }
    Param& w1() { return w1_; }
    Param& w2() { return w2_; }
    void params(std::vector<Param*>& out) {
        out.push_back(&w1_);
        out.push_back(&w2_);
    }

    void save(BinaryWriter& w) const {
        w.u64(in_);
        w.u64(att_);
        w1_.save(w);
        w2_.save(w);
    }
    void load(BinaryReader& r) {
        in_ = r.u64();
        att_ = r.u64();
        w1_.load(r);
        w2_.load(r);
        if (w1_.size() != in_ * att_ || w2_.size() != in_ * att_) throw Error("attention: corrupt checkpoint");
    }

private:
    // W is att x in, row-major
    std::vector<double> project(const Param& w, std::span<const double> x) const {
        std::vector<double> y(att_, 0.0);
        for (std::size_t a = 0; a < att_; ++a) {
            const double* row = w.value.data() + a * in_;
            double acc = 0.0;
            for (std::size_t k = 0; k < in_; ++k) acc += row[k] * x[k];
            y[a] = acc;
        }
        return y;
    }

    void project_backward(Param& w, std::span<const double> x, std::span<const double> dy, std::span<double> dx) {
        for (std::size_t a = 0; a < att_; ++a) {
            const double g = dy[a];
            if (g == 0.0) continue;
            double* grow = w.grad.data() + a * in_;
            const double* row = w.value.data() + a * in_;
            for (std::size_t k = 0; k < in_; ++k) {
                grow[k] += g * x[k];
                if (!dx.empty()) dx[k] += g * row[k];
            }
        }
    }

    std::size_t in_ = 0;
    std::size_t att_ = 0;
    Param w1_;
    Param w2_;
};

struct PathBundle {
    EntityId source = 0;
    EntityId target = 0;
    std::vector<RelationPath> paths;
    std::vector<std::vector<double>> textual_reps;
    std::vector<std::vector<double>> hybrid_reps;
};

inline std::vector<double> attend_paths(std::span<const double> q, const PathBundle& bundle,
                                        const PathAttention& attention) {
    if (bundle.paths.empty() || bundle.textual_reps.size() != bundle.paths.size() ||
        bundle.hybrid_reps.size() != bundle.paths.size())
        throw Error("attend_paths: empty or inconsistent bundle");
    std::vector<std::span<const double>> t, h;
    for (std::size_t i = 0; i < bundle.paths.size(); ++i) {
        t.emplace_back(bundle.textual_reps[i]);
        h.emplace_back(bundle.hybrid_reps[i]);
    }
    return attention.forward(q, t, h).output;
}

}  // namespace terp
