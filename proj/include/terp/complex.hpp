#pragma once

// Dense complex-vector arithmetic. A ComplexVec of dimension d stores its real
// and imaginary parts as two real vectors of length d; views over either the
// owning type or flat parameter storage are passed as ComplexView.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "terp/error.hpp"

namespace terp {

enum class Norm { L1, L2 };

struct ComplexView {
    std::span<const double> re;
    std::span<const double> im;

    std::size_t dim() const { return re.size(); }
};

struct ComplexVec {
    std::vector<double> re;
    std::vector<double> im;

    ComplexVec() = default;
    explicit ComplexVec(std::size_t d) : re(d, 0.0), im(d, 0.0) {}
    ComplexVec(std::vector<double> real, std::vector<double> imag)
        : re(std::move(real)), im(std::move(imag)) {
        if (re.size() != im.size()) throw DimensionError("ComplexVec: re/im length mismatch");
    }
    explicit ComplexVec(ComplexView v)
        : re(v.re.begin(), v.re.end()), im(v.im.begin(), v.im.end()) {}

    static ComplexVec ones(std::size_t d) {
        ComplexVec v(d);
        std::fill(v.re.begin(), v.re.end(), 1.0);
        return v;
    }

    std::size_t dim() const { return re.size(); }
    ComplexView view() const { return {re, im}; }
    operator ComplexView() const { return view(); }  // NOLINT(google-explicit-constructor)

    // re followed by im, length 2d
    std::vector<double> flatten() const {
        std::vector<double> out(re);
        out.insert(out.end(), im.begin(), im.end());
        return out;
    }

    bool operator==(const ComplexVec&) const = default;
};

inline void check_same_dim(ComplexView a, ComplexView b, const char* op) {
    if (a.re.size() != a.im.size() || b.re.size() != b.im.size() || a.dim() != b.dim())
        throw DimensionError(std::string(op) + ": dimension mismatch");
}

inline ComplexVec conj(ComplexView a) {
    ComplexVec out(a);
    for (double& x : out.im) x = -x;
    return out;
}

inline ComplexVec hadamard(ComplexView a, ComplexView b) {
    check_same_dim(a, b, "hadamard");
    const std::size_t d = a.dim();
    ComplexVec out(d);
    for (std::size_t j = 0; j < d; ++j) {
        out.re[j] = a.re[j] * b.re[j] - a.im[j] * b.im[j];
        out.im[j] = a.re[j] * b.im[j] + a.im[j] * b.re[j];
    }
    return out;
}

inline ComplexVec from_polar(std::span<const double> m, std::span<const double> theta) {
    if (m.size() != theta.size()) throw DimensionError("from_polar: dimension mismatch");
    ComplexVec out(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) {
        out.re[j] = m[j] * std::cos(theta[j]);
        out.im[j] = m[j] * std::sin(theta[j]);
    }
    return out;
}

inline std::vector<double> modulus(ComplexView a) {
    std::vector<double> out(a.dim());
    for (std::size_t j = 0; j < a.dim(); ++j) out[j] = std::hypot(a.re[j], a.im[j]);
    return out;
}

/// Component-wise argument in (-pi, pi]; zero components have phase 0.
inline std::vector<double> phase(ComplexView a) {
    std::vector<double> out(a.dim());
    for (std::size_t j = 0; j < a.dim(); ++j) {
        if (a.re[j] == 0.0 && a.im[j] == 0.0) {
            out[j] = 0.0;
            continue;
        }
        double p = std::atan2(a.im[j], a.re[j]);
        if (p == -std::numbers::pi) p = std::numbers::pi;
        out[j] = p;
    }
    return out;
}

/// L1: sum of complex moduli of the difference. L2: Euclidean norm of the
/// difference viewed as a 2d-dimensional real vector.
inline double distance(ComplexView a, ComplexView b, Norm norm) {
    check_same_dim(a, b, "distance");
    double acc = 0.0;
    for (std::size_t j = 0; j < a.dim(); ++j) {
        const double dr = a.re[j] - b.re[j];
        const double di = a.im[j] - b.im[j];
        if (norm == Norm::L1)
            acc += std::hypot(dr, di);
        else
            acc += dr * dr + di * di;
    }
    return norm == Norm::L1 ? acc : std::sqrt(acc);
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double y = std::remainder(x, two_pi);
    if (y <= -std::numbers::pi) y += two_pi;
    return y;
}

/// -|| h o r - c ||. Shared by triple scoring and the question/path views.
inline double rotation_score(ComplexView h, ComplexView r, ComplexView c, Norm norm) {
    check_same_dim(h, r, "rotation_score");
    check_same_dim(h, c, "rotation_score");
    double acc = 0.0;
    for (std::size_t j = 0; j < h.dim(); ++j) {
        const double zr = h.re[j] * r.re[j] - h.im[j] * r.im[j] - c.re[j];
        const double zi = h.re[j] * r.im[j] + h.im[j] * r.re[j] - c.im[j];
        if (norm == Norm::L1)
            acc += std::hypot(zr, zi);
        else
            acc += zr * zr + zi * zi;
    }
    return -(norm == Norm::L1 ? acc : std::sqrt(acc));
}

/// Backward of rotation_score: accumulates d(score)/dh, dr, dc scaled by
/// `upstream`. Any of the gradient outputs may be null. At a zero residual
/// the subgradient 0 is used.
struct RotationGrads {
    double* h_re = nullptr;
    double* h_im = nullptr;
    double* r_re = nullptr;
    double* r_im = nullptr;
    double* c_re = nullptr;
    double* c_im = nullptr;
};

inline void rotation_score_backward(ComplexView h, ComplexView r, ComplexView c, Norm norm,
                                    double upstream, const RotationGrads& g) {
    const std::size_t d = h.dim();
    double l2 = 0.0;
    if (norm == Norm::L2) {
        for (std::size_t j = 0; j < d; ++j) {
            const double zr = h.re[j] * r.re[j] - h.im[j] * r.im[j] - c.re[j];
            const double zi = h.re[j] * r.im[j] + h.im[j] * r.re[j] - c.im[j];
            l2 += zr * zr + zi * zi;
        }
        l2 = std::sqrt(l2);
        if (l2 == 0.0) return;
    }
    for (std::size_t j = 0; j < d; ++j) {
        const double zr = h.re[j] * r.re[j] - h.im[j] * r.im[j] - c.re[j];
        const double zi = h.re[j] * r.im[j] + h.im[j] * r.re[j] - c.im[j];
        double denom = norm == Norm::L1 ? std::hypot(zr, zi) : l2;
        if (denom == 0.0) continue;
        // d(score)/dz = -z/|z|
        const double gr = -upstream * zr / denom;
        const double gi = -upstream * zi / denom;
        if (g.r_re) g.r_re[j] += gr * h.re[j] + gi * h.im[j];
        if (g.r_im) g.r_im[j] += -gr * h.im[j] + gi * h.re[j];
        if (g.h_re) g.h_re[j] += gr * r.re[j] + gi * r.im[j];
        if (g.h_im) g.h_im[j] += -gr * r.im[j] + gi * r.re[j];
        if (g.c_re) g.c_re[j] -= gr;
        if (g.c_im) g.c_im[j] -= gi;
    }
}

/// Re(sum_j h_j r_j conj(c_j)), the ComplEx trilinear form.
inline double trilinear_score(ComplexView h, ComplexView r, ComplexView c) {
    check_same_dim(h, r, "trilinear_score");
    check_same_dim(h, c, "trilinear_score");
    double acc = 0.0;
    for (std::size_t j = 0; j < h.dim(); ++j) {
        const double pr = h.re[j] * r.re[j] - h.im[j] * r.im[j];
        const double pi = h.re[j] * r.im[j] + h.im[j] * r.re[j];
        acc += pr * c.re[j] + pi * c.im[j];
    }
    return acc;
}

inline void trilinear_score_backward(ComplexView h, ComplexView r, ComplexView c, double upstream,
                                     const RotationGrads& g) {
    for (std::size_t j = 0; j < h.dim(); ++j) {
        const double pr = h.re[j] * r.re[j] - h.im[j] * r.im[j];
        const double pi = h.re[j] * r.im[j] + h.im[j] * r.re[j];
        // score = pr*c_re + pi*c_im
        const double gr = upstream * c.re[j];
        const double gi = upstream * c.im[j];
        if (g.c_re) g.c_re[j] += upstream * pr;
        if (g.c_im) g.c_im[j] += upstream * pi;
        if (g.r_re) g.r_re[j] += gr * h.re[j] + gi * h.im[j];
        if (g.r_im) g.r_im[j] += -gr * h.im[j] + gi * h.re[j];
        if (g.h_re) g.h_re[j] += gr * r.re[j] + gi * r.im[j];
        if (g.h_im) g.h_im[j] += -gr * r.im[j] + gi * r.re[j];
    }
}

}  // namespace terp
