#pragma once

// Central finite differences against analytic gradients.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "terp/nn.hpp"

namespace terp::testing {

struct FdResult {
    double worst = 0.0;  // largest relative error seen
    std::size_t checked = 0;
    std::string where;
};

inline double rel_error(double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
    return std::abs(analytic - numeric) / scale;
}

/// Perturbs `samples` random coordinates of each param and compares the
/// central difference of loss() with param.grad. loss() must not touch grads.
inline FdResult fd_check_params(const std::vector<std::pair<std::string, Param*>>& params,
                                const std::function<double()>& loss, std::mt19937_64& rng, std::size_t samples,
                                double eps = 1e-6) {
    FdResult r;
    for (const auto& [name, p] : params) {
        if (p->size() == 0) continue;
        std::uniform_int_distribution<std::size_t> pick(0, p->size() - 1);
        for (std::size_t s = 0; s < samples; ++s) {
            const std::size_t i = pick(rng);
            const double keep = p->value[i];
            p->value[i] = keep + eps;
            const double up = loss();
            p->value[i] = keep - eps;
            const double down = loss();
            p->value[i] = keep;
            const double e = rel_error(p->grad[i], (up - down) / (2 * eps));
            ++r.checked;
            if (e > r.worst) {
                r.worst = e;
                r.where = name + "[" + std::to_string(i) + "]";
            }
        }
    }
    return r;
}

/// Same for a plain input vector with an analytic gradient.
inline FdResult fd_check_vector(std::vector<double>& x, const std::vector<double>& grad,
                                const std::function<double()>& loss, const std::string& name, double eps = 1e-6) {
    FdResult r;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + eps;
        const double up = loss();
        x[i] = keep - eps;
        const double down = loss();
        x[i] = keep;
        const double e = rel_error(grad[i], (up - down) / (2 * eps));
        ++r.checked;
        if (e > r.worst) {
            r.worst = e;
            r.where = name + "[" + std::to_string(i) + "]";
        }
    }
    return r;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

}  // namespace terp::testing
