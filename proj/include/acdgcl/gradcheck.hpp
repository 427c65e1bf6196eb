#pragma once

#include <algorithm>
#include <functional>
#include <random>

#include "acdgcl/ops.hpp"
#include "acdgcl/tape.hpp"

namespace acdgcl {

struct FiniteDiffReport {
    double max_rel_err = 0.0;
    double tol = 0.0;
    long coords_checked = 0;
    bool pass = false;
    std::string worst_param;
    Index worst_index = -1;
};

/// Builds a scalar loss on the tape from named parameter leaves.
template <class Scalar>
using TapeObjective = std::function<Var(TapeT<Scalar>&, const std::map<std::string, Var>&)>;

namespace detail {

template <class Scalar>
Scalar eval_objective(const TapeObjective<Scalar>& objective, const ParamMapT<Scalar>& params) {
    TapeT<Scalar> tape;
    std::map<std::string, Var> vars;
    for (const auto& [name, value] : params) vars.emplace(name, tape.param(name, value));
    Var loss = objective(tape, vars);
    return tape.value(loss).value();
}

}  // namespace detail

/// Central-difference check of the tape gradient of `objective` at `params`.
/// Samples up to `max_coords` coordinates (all of them when the parameter
/// count is smaller). The objective must be deterministic.
template <class Scalar>
FiniteDiffReport finite_diff_check(const TapeObjective<Scalar>& objective,
                                   const ParamMapT<Scalar>& params, Scalar h, Scalar tol,
                                   long max_coords = 100, uint64_t seed = 0) {
    if (!(h > Scalar(0))) throw std::invalid_argument("finite_diff_check: h must be positive");

    TapeT<Scalar> tape;
    std::map<std::string, Var> vars;
    for (const auto& [name, value] : params) vars.emplace(name, tape.param(name, value));
    Var loss = objective(tape, vars);
    const Scalar f0 = tape.value(loss).value();
    GradientMapT<Scalar> analytic = tape.backward(loss);

    const Scalar f0_again = detail::eval_objective(objective, params);
    if (f0 != f0_again)
        throw std::runtime_error("finite_diff_check: objective is not deterministic (" +
                                 std::to_string(f0) + " vs " + std::to_string(f0_again) + ")");

    std::vector<std::pair<std::string, Index>> coords;
    for (const auto& [name, value] : params)
        for (Index i = 0; i < value.size(); ++i) coords.emplace_back(name, i);
    if (static_cast<long>(coords.size()) > max_coords) {
        std::mt19937_64 rng(seed);
        std::shuffle(coords.begin(), coords.end(), rng);
        coords.resize(max_coords);
    }

    FiniteDiffReport report;
    report.tol = static_cast<double>(tol);
    for (const auto& [name, i] : coords) {
        ParamMapT<Scalar> perturbed = params;
        perturbed.at(name)[i] = params.at(name)[i] + h;
        const Scalar f_plus = detail::eval_objective(objective, perturbed);
        perturbed.at(name)[i] = params.at(name)[i] - h;
        const Scalar f_minus = detail::eval_objective(objective, perturbed);
        const Scalar fd = (f_plus - f_minus) / (Scalar(2) * h);
        const Scalar an = analytic.at(name)[i];
        const Scalar denom = std::max(std::abs(fd), std::abs(an));
        const double err = denom < Scalar(1e-12) ? 0.0 : static_cast<double>(std::abs(fd - an) / denom);
        if (err > report.max_rel_err) {
            report.max_rel_err = err;
            report.worst_param = name;
            report.worst_index = i;
        }
        ++report.coords_checked;
    }
    report.pass = report.max_rel_err < static_cast<double>(tol);
    return report;
}

}  // namespace acdgcl
