#pragma once

// Minimal trainable building blocks: parameter blocks with Adam state, dense
// layers and the single-hidden-layer ReLU feed-forward network used by the
// fusion and rotate-and-scale heads. Backward passes are written by hand and
// accumulate into Param::grad.

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "terp/error.hpp"
#include "terp/serialize.hpp"

namespace terp {

struct Param {
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<double> m;
    std::vector<double> v;

    Param() = default;
    explicit Param(std::size_t n) : value(n, 0.0), grad(n, 0.0), m(n, 0.0), v(n, 0.0) {}

    std::size_t size() const { return value.size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
    void reset_moments() {
        m.assign(value.size(), 0.0);
        v.assign(value.size(), 0.0);
        grad.assign(value.size(), 0.0);
    }

    void fill_uniform(std::mt19937_64& rng, double bound) {
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& x : value) x = dist(rng);
    }

    void save(BinaryWriter& w) const { w.doubles(value); }
    void load(BinaryReader& r) {
        value = r.doubles();
        reset_moments();
    }
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.998;
    double epsilon = 1e-8;
};

class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(std::span<Param* const> params) {
        begin_step();
        for (Param* p : params) update(*p);
    }

    void begin_step() {
        ++t_;
        c1_ = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        c2_ = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    }

    void update(Param& p) { update_range(p, 0, p.size()); }

    /// Lazy update of selected rows of a row-major table; rows not listed
    /// keep their moments untouched.
    void update_rows(Param& p, std::span<const std::size_t> rows, std::size_t width) {
        for (std::size_t row : rows) update_range(p, row * width, (row + 1) * width);
    }

    long steps() const { return t_; }

private:
    void update_range(Param& p, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double g = p.grad[i];
            p.m[i] = cfg_.beta1 * p.m[i] + (1.0 - cfg_.beta1) * g;
            p.v[i] = cfg_.beta2 * p.v[i] + (1.0 - cfg_.beta2) * g * g;
            p.value[i] -= cfg_.learning_rate * (p.m[i] / c1_) / (std::sqrt(p.v[i] / c2_) + cfg_.epsilon);
        }
    }

    AdamConfig cfg_;
    long t_ = 0;
    double c1_ = 1.0;
    double c2_ = 1.0;
};

/// y = W x + b with W stored row-major (out x in).
struct Dense {
    std::size_t in = 0;
    std::size_t out = 0;
    Param weight;
    Param bias;

    Dense() = default;
    Dense(std::size_t in_dim, std::size_t out_dim) : in(in_dim), out(out_dim), weight(in_dim * out_dim), bias(out_dim) {}

    void init(std::mt19937_64& rng) {
        weight.fill_uniform(rng, std::sqrt(6.0 / static_cast<double>(in + out)));
        std::fill(bias.value.begin(), bias.value.end(), 0.0);
    }

    void forward(std::span<const double> x, std::span<double> y) const {
        for (std::size_t o = 0; o < out; ++o) {
            const double* row = weight.value.data() + o * in;
            double acc = bias.value[o];
            for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
            y[o] = acc;
        }
    }

    /// Accumulates parameter gradients; adds dL/dx into dx when non-empty.
    void backward(std::span<const double> x, std::span<const double> dy, std::span<double> dx) {
        for (std::size_t o = 0; o < out; ++o) {
            const double g = dy[o];
            if (g == 0.0) continue;
            bias.grad[o] += g;
            double* grow = weight.grad.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) grow[i] += g * x[i];
            if (!dx.empty()) {
                const double* row = weight.value.data() + o * in;
                for (std::size_t i = 0; i < in; ++i) dx[i] += g * row[i];
            }
        }
    }

    void params(std::vector<Param*>& out_params) {
        out_params.push_back(&weight);
        out_params.push_back(&bias);
    }
};

struct FfnCache {
    std::vector<double> hidden;  // post-ReLU
    std::vector<double> output;
};

/// Linear -> ReLU -> Linear.
class Ffn {
public:
    Ffn() = default;
    Ffn(std::size_t in, std::size_t hidden, std::size_t out) : l1_(in, hidden), l2_(hidden, out) {}

    void init(std::mt19937_64& rng) {
        l1_.init(rng);
        l2_.init(rng);
    }

    std::size_t in_dim() const { return l1_.in; }
    std::size_t hidden_dim() const { return l1_.out; }
    std::size_t out_dim() const { return l2_.out; }

    FfnCache forward(std::span<const double> x) const {
        if (x.size() != l1_.in) throw DimensionError("Ffn: input width mismatch");
        FfnCache c;
        c.hidden.resize(l1_.out);
        c.output.resize(l2_.out);
        l1_.forward(x, c.hidden);
        for (double& h : c.hidden) h = h > 0.0 ? h : 0.0;
        l2_.forward(c.hidden, c.output);
        return c;
    }

    std::vector<double> operator()(std::span<const double> x) const { return forward(x).output; }

    /// dx may be empty when the input gradient is not needed.
    void backward(std::span<const double> x, const FfnCache& c, std::span<const double> dout, std::span<double> dx) {
        std::vector<double> dh(l1_.out, 0.0);
        l2_.backward(c.hidden, dout, dh);
        for (std::size_t i = 0; i < dh.size(); ++i)
            if (c.hidden[i] <= 0.0) dh[i] = 0.0;
        l1_.backward(x, dh, dx);
    }

    void params(std::vector<Param*>& out) {
        l1_.params(out);
        l2_.params(out);
    }

    Dense& first() { return l1_; }
    Dense& second() { return l2_; }
    const Dense& first() const { return l1_; }
    const Dense& second() const { return l2_; }

    void save(BinaryWriter& w) const {
        w.u64(l1_.in);
        w.u64(l1_.out);
        w.u64(l2_.out);
        l1_.weight.save(w);
        l1_.bias.save(w);
        l2_.weight.save(w);
        l2_.bias.save(w);
    }

    void load(BinaryReader& r) {
        const auto in = r.u64(), hid = r.u64(), out = r.u64();
        *this = Ffn(in, hid, out);
        l1_.weight.load(r);
        l1_.bias.load(r);
        l2_.weight.load(r);
        l2_.bias.load(r);
        if (l1_.weight.size() != in * hid || l2_.weight.size() != hid * out) throw Error("Ffn: corrupt checkpoint");
    }

private:
    Dense l1_;
    Dense l2_;
};

inline void zero_grads(std::span<Param* const> params) {
    for (Param* p : params) p->zero_grad();
}

}  // namespace terp
