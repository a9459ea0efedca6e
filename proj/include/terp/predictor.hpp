#pragma once

// Rotate-and-scale projection of question/path vectors into the complex
// embedding space, candidate scoring, score combination, candidate sampling
// and the two-view cross-entropy objective.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "terp/complex.hpp"
#include "terp/error.hpp"
#include "terp/knowledge_graph.hpp"
#include "terp/nn.hpp"

namespace terp {

/// How a view vector becomes a relation representation.
///   RotateScale: r = m o exp(i theta), both from independent FFNs.
///   RotateOnly:  m fixed to 1 (pure rotation).
///   Complex:     a single FFN emits re and im directly; scored with the
///                ComplEx trilinear form.
enum class HeadKind { RotateScale, RotateOnly, Complex };

inline const char* to_string(HeadKind k) {
    switch (k) {
        case HeadKind::RotateScale: return "rotate_scale";
        case HeadKind::RotateOnly: return "rotate";
        case HeadKind::Complex: return "complex";
    }
    return "?";
}

inline HeadKind parse_head_kind(const std::string& s) {
    if (s == "rotate_scale") return HeadKind::RotateScale;
    if (s == "rotate") return HeadKind::RotateOnly;
    if (s == "complex") return HeadKind::Complex;
    throw Error("unknown head kind: " + s);
}

struct RotateScaleRep {
    std::vector<double> theta;
    std::vector<double> m;
    ComplexVec rep;
};

class RotateScaleHead {
public:
    RotateScaleHead() = default;
    RotateScaleHead(std::size_t in_width, std::size_t complex_dim, HeadKind kind = HeadKind::RotateScale)
        : kind_(kind),
          in_(in_width),
          dim_(complex_dim),
          theta_ffn_(in_width, 2 * in_width, kind == HeadKind::Complex ? 2 * complex_dim : complex_dim),
          m_ffn_(in_width, 2 * in_width, complex_dim) {}

    /// Xavier weights; the scale head starts with bias 1 so that an untrained
    /// head begins near a pure rotation.
    void init(std::mt19937_64& rng) {
        theta_ffn_.init(rng);
        m_ffn_.init(rng);
        if (kind_ == HeadKind::Complex) {
            auto& b = theta_ffn_.second().bias.value;
            std::fill(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(dim_), 1.0);
        } else {
            std::fill(m_ffn_.second().bias.value.begin(), m_ffn_.second().bias.value.end(), 1.0);
        }
    }

    struct Cache {
        FfnCache theta;
        FfnCache m;
        RotateScaleRep out;
    };

    Cache forward(std::span<const double> view) const {
        if (view.size() != in_) throw DimensionError("project: view width mismatch");
        Cache c;
        c.theta = theta_ffn_.forward(view);
        if (kind_ == HeadKind::Complex) {
            const auto& o = c.theta.output;
            c.out.rep = ComplexVec(std::vector<double>(o.begin(), o.begin() + static_cast<std::ptrdiff_t>(dim_)),
                                   std::vector<double>(o.begin() + static_cast<std::ptrdiff_t>(dim_), o.end()));
            return c;
        }
        c.out.theta = c.theta.output;
        if (kind_ == HeadKind::RotateScale) {
            c.m = m_ffn_.forward(view);
            c.out.m = c.m.output;
        } else {
            c.out.m.assign(dim_, 1.0);
        }
        c.out.rep = from_polar(c.out.m, c.out.theta);
        return c;
    }

    void backward(std::span<const double> view, const Cache& c, std::span<const double> d_re,
                  std::span<const double> d_im, std::span<double> dview) {
        if (kind_ == HeadKind::Complex) {
            std::vector<double> dout(d_re.begin(), d_re.end());
            dout.insert(dout.end(), d_im.begin(), d_im.end());
            theta_ffn_.backward(view, c.theta, dout, dview);
            return;
        }
        std::vector<double> dtheta(dim_), dm(dim_);
        for (std::size_t j = 0; j < dim_; ++j) {
            const double cs = std::cos(c.out.theta[j]), sn = std::sin(c.out.theta[j]);
            dm[j] = d_re[j] * cs + d_im[j] * sn;
            dtheta[j] = c.out.m[j] * (-d_re[j] * sn + d_im[j] * cs);
        }
        theta_ffn_.backward(view, c.theta, dtheta, dview);
        if (kind_ == HeadKind::RotateScale) m_ffn_.backward(view, c.m, dm, dview);
    }

    HeadKind kind() const { return kind_; }
    std::size_t in_width() const { return in_; }
    std::size_t dim() const { return dim_; }
    Ffn& theta_ffn() { return theta_ffn_; }
    Ffn& m_ffn() { return m_ffn_; }

    void params(std::vector<Param*>& out) {
        theta_ffn_.params(out);
        if (kind_ == HeadKind::RotateScale) m_ffn_.params(out);
    }

    void save(BinaryWriter& w) const {
        w.str(to_string(kind_));
        w.u64(in_);
        w.u64(dim_);
        theta_ffn_.save(w);
        m_ffn_.save(w);
    }
    void load(BinaryReader& r) {
        kind_ = parse_head_kind(r.str());
        in_ = r.u64();
        dim_ = r.u64();
        theta_ffn_.load(r);
        m_ffn_.load(r);
    }

private:
    HeadKind kind_ = HeadKind::RotateScale;
    std::size_t in_ = 0;
    std::size_t dim_ = 0;
    Ffn theta_ffn_;
    Ffn m_ffn_;
};

inline RotateScaleRep project(std::span<const double> view, const RotateScaleHead& head) {
    return head.forward(view).out;
}

/// -|| e_h o r - e_c ||, shared by the question and path views.
inline double score_view(ComplexView e_h, const RotateScaleRep& r, ComplexView e_c, Norm norm) {
    return rotation_score(e_h, r.rep, e_c, norm);
}

/// (1 - lambda) s_q + lambda s_p, or s_q alone when the path view is absent.
inline double combine(double s_q, std::optional<double> s_p, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error("combine: lambda must be in [0,1]");
    if (!s_p) return s_q;
    return (1.0 - lambda) * s_q + lambda * *s_p;
}

struct CandidateSample {
    std::vector<EntityId> candidates;
    std::size_t target_index = 0;
};

/// `gold` followed by up to N-1 distinct negatives drawn uniformly from the
/// subgraph, never drawing any gold answer.
inline CandidateSample sample_candidates_for(const Subgraph& subgraph, EntityId gold, std::span<const EntityId> answers,
                                             std::size_t n, std::mt19937_64& rng) {
    if (subgraph.entity_ids.empty()) throw Error("sample_candidates: empty subgraph");
    if (n == 0) throw Error("sample_candidates: N must be positive");
    std::vector<EntityId> pool;
    pool.reserve(subgraph.size());
    for (EntityId e : subgraph.entity_ids)
        if (std::find(answers.begin(), answers.end(), e) == answers.end() && e != gold) pool.push_back(e);
    const std::size_t k = std::min(n - 1, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    CandidateSample s;
    s.candidates.push_back(gold);
    s.candidates.insert(s.candidates.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    return s;
}

inline CandidateSample sample_candidates(const Subgraph& subgraph, std::span<const EntityId> answers, std::size_t n,
                                         std::uint64_t seed) {
    if (subgraph.entity_ids.empty()) throw Error("sample_candidates: empty subgraph");
    std::vector<EntityId> golds;
    for (EntityId a : answers)
        if (subgraph.contains(a)) golds.push_back(a);
    if (golds.empty()) throw Error("sample_candidates: no gold answer inside the subgraph");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, golds.size() - 1);
    const EntityId gold = golds[pick(rng)];
    return sample_candidates_for(subgraph, gold, answers, n, rng);
}

/// -log softmax(scores)[target]; writes softmax - onehot into grad if given.
inline double cross_entropy(std::span<const double> scores, std::size_t target, std::span<double> grad = {}) {
    if (target >= scores.size()) throw Error("cross_entropy: target index out of range");
    const double mx = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - mx);
    const double log_z = mx + std::log(z);
    if (!grad.empty()) {
        for (std::size_t i = 0; i < scores.size(); ++i) grad[i] = std::exp(scores[i] - log_z);
        grad[target] -= 1.0;
    }
    return log_z - scores[target];
}

/// CE over the question-view scores plus CE over the path-view scores; the
/// second term is dropped when sp_scores is empty (no path view).
inline double qa_loss(std::span<const double> sq_scores, std::span<const double> sp_scores, std::size_t target) {
    if (!sp_scores.empty() && sp_scores.size() != sq_scores.size()) throw Error("qa_loss: length mismatch");
    double loss = cross_entropy(sq_scores, target);
    if (!sp_scores.empty()) loss += cross_entropy(sp_scores, target);
    return loss;
}

}  // namespace terp
