#pragma once

// Central finite-difference oracle. Independent of the backward rules: it only
// evaluates the loss forward with recording switched off.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cnmt/numcore/params.hpp"
#include "cnmt/numcore/tensor.hpp"

namespace cnmt::testing {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t checked = 0;
    // Entries where the one-sided slopes disagree (a relu or max kink lies
    // within one step); central differences are meaningless there.
    std::size_t kinks = 0;
    bool any_nonzero = false;
};

struct GradCheckOptions {
    double step = 1e-5;
    // Denominator floor: gradients far below this are compared absolutely.
    double floor = 1e-6;
    // Check at most this many entries per tensor (evenly strided); 0 = all.
    std::size_t max_entries_per_tensor = 0;
    // One-sided slopes further apart than this (relative) mark a kink.
    double kink_tolerance = 1e-2;
};

inline double relative_error(double analytic, double numeric, double floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

/// `loss` must build a scalar from the tensors in `inputs` using recorded ops.
inline GradCheckResult grad_check(std::vector<num::NamedTensor<double>> inputs,
                                  const std::function<num::Tensor<double>()>& loss,
                                  GradCheckOptions opts = {}) {
    for (auto& in : inputs) {
        in.tensor.set_requires_grad(true);
        in.tensor.zero_grad();
    }
    {
        num::Tape<double> tape;
        num::TapeScope<double> scope(tape);
        tape.backward(loss());
    }
    double base = 0.0;
    {
        num::NoGradScope<double> off;
        base = loss().item();
    }
    GradCheckResult result;
    for (auto& in : inputs) {
        std::vector<double> analytic(in.tensor.size(), 0.0);
        if (in.tensor.has_grad()) {
            std::copy(in.tensor.grad().begin(), in.tensor.grad().end(), analytic.begin());
        }
        auto values = in.tensor.data();
        std::size_t stride = 1;
        if (opts.max_entries_per_tensor > 0 && values.size() > opts.max_entries_per_tensor) {
            stride = values.size() / opts.max_entries_per_tensor;
        }
        for (std::size_t i = 0; i < values.size(); i += stride) {
            const double saved = values[i];
            double plus = 0.0;
            double minus = 0.0;
            {
                num::NoGradScope<double> off;
                values[i] = saved + opts.step;
                plus = loss().item();
                values[i] = saved - opts.step;
                minus = loss().item();
            }
            values[i] = saved;
            const double numeric = (plus - minus) / (2.0 * opts.step);
            const double forward = (plus - base) / opts.step;
            const double backward = (base - minus) / opts.step;
            if (analytic[i] != 0.0) {
                result.any_nonzero = true;
            }
            if (relative_error(forward, backward, std::max(opts.floor, 1e-3)) > opts.kink_tolerance) {
                ++result.kinks;
                continue;
            }
            const double err = relative_error(analytic[i], numeric, opts.floor);
            ++result.checked;
            if (err > result.max_rel_error) {
                result.max_rel_error = err;
                result.worst_param = in.name;
                result.worst_index = i;
                result.worst_analytic = analytic[i];
                result.worst_numeric = numeric;
            }
        }
    }
    return result;
}

inline std::string describe(const GradCheckResult& r) {
    return "max rel err " + std::to_string(r.max_rel_error) + " at " + r.worst_param + "[" +
           std::to_string(r.worst_index) + "] analytic=" + std::to_string(r.worst_analytic) +
           " numeric=" + std::to_string(r.worst_numeric) + " over " + std::to_string(r.checked) + " entries (" +
           std::to_string(r.kinks) + " kinks skipped)";
}

} // namespace cnmt::testing
