#pragma once

// V-information: predictive information relative to a restricted family of
// predictors. On finite alphabets every family here admits an exactly
// computable or convexly optimizable infimum:
//
//   FULL            every conditional distribution, inf = Shannon H(Y|X)
//   CONST           constant predictors only, inf = H(Y)
//   PARTITION       predictors constant on blocks of the side alphabet
//   LINEAR_SOFTMAX  softmax of a linear map of side features, fit by the
//                   estimator module's deterministic descent
//
// All four satisfy optional ignorance by construction (each contains every
// constant predictor), so the V-information below is nonnegative up to
// numerical noise.
//
// Conditional V-information is defined through side concatenation: the
// conditioning variable is appended to the side set, and a PARTITION family
// lifts its blocks by crossing them with the appended symbols. With the
// FULL family this reproduces Shannon conditional mutual information.

#include <cmath>
#include <string>
#include <vector>

#include "synergy/encoder.hpp"
#include "synergy/errors.hpp"
#include "synergy/estimator.hpp"
#include "synergy/info.hpp"
#include "synergy/joint_table.hpp"

namespace synergy {

inline constexpr double kVClampTol = 1e-10;
inline constexpr double kVFitSlack = 1e-6;
inline constexpr double kVGradTol = 1e-3;

struct PredictiveFamily {
    enum class Kind { full, constant, partition, linear_softmax };
    Kind kind = Kind::full;
    std::vector<std::vector<std::string>> blocks;  // partition of the first side variable
    TrainConfig train;                             // linear-softmax fit budget
    std::vector<std::vector<double>> features;     // optional explicit feature map

    static PredictiveFamily full() { return {}; }
    static PredictiveFamily constant() {
        PredictiveFamily f;
        f.kind = Kind::constant;
        return f;
    }
    static PredictiveFamily partition(std::vector<std::vector<std::string>> blocks) {
        PredictiveFamily f;
        f.kind = Kind::partition;
        f.blocks = std::move(blocks);
        return f;
    }
    static PredictiveFamily linear_softmax(TrainConfig train = {},
                                           std::vector<std::vector<double>> features = {}) {
        PredictiveFamily f;
        f.kind = Kind::linear_softmax;
        f.train = train;
        f.features = std::move(features);
        return f;
    }
};

namespace detail {

// Maps each symbol of `var` to its block index, checking that the blocks
// form an exact partition of the alphabet.
inline std::vector<std::size_t> block_assignment(const Alphabet& var,
                                                 const std::vector<std::vector<std::string>>& blocks) {
    if (blocks.empty()) throw usage_error("partition of '" + var.name + "' has no blocks");
    std::vector<std::size_t> assign(var.size(), blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].empty()) throw usage_error("partition of '" + var.name + "' has an empty block");
        for (const std::string& sym : blocks[b]) {
            const std::size_t i = var.index_of(sym);
            if (assign[i] != blocks.size())
                throw usage_error("partition of '" + var.name + "': symbol '" + sym + "' repeated");
            assign[i] = b;
        }
    }
    for (std::size_t i = 0; i < var.size(); ++i)
        if (assign[i] == blocks.size())
            throw usage_error("partition of '" + var.name + "': symbol '" + var.symbols[i] +
                              "' not covered");
    return assign;
}

}  // namespace detail

// Infimum of the expected cross-entropy of predicting y from the side set,
// over the given family. Empty side means no information for any family.
inline double v_conditional_entropy(const PredictiveFamily& family, const JointTable& joint,
                                    const std::string& y, const std::vector<std::string>& x = {}) {
    joint.var_index(y);
    for (const auto& n : x) {
        if (n == y) throw usage_error("v_conditional_entropy: target inside the side set");
        joint.var_index(n);
    }
    if (x.empty() || family.kind == PredictiveFamily::Kind::constant) return entropy(joint, {y});

    switch (family.kind) {
        case PredictiveFamily::Kind::full:
            return conditional_entropy(joint, {y}, x);
        case PredictiveFamily::Kind::partition: {
            const Alphabet& head = joint.alphabet(x.front());
            const std::vector<std::size_t> assign = detail::block_assignment(head, family.blocks);
            Alphabet coarse{detail::fresh_var_name(joint, head.name + "_block"), {}};
            for (std::size_t b = 0; b < family.blocks.size(); ++b)
                coarse.symbols.push_back(std::to_string(b));
            const JointTable ext = joint.extend_deterministic(
                coarse, {x.front()},
                [&assign](const std::vector<std::size_t>& arg) { return assign[arg[0]]; });
            std::vector<std::string> side{coarse.name};
            side.insert(side.end(), x.begin() + 1, x.end());
            return conditional_entropy(ext, {y}, side);
        }
        case PredictiveFamily::Kind::linear_softmax: {
            TrainConfig train = family.train;
            train.mode = TrainConfig::Mode::population;  // the inf is a population objective
            const FitResult r = fit_predictor(joint, y, x, train, family.features);
            if (r.final_ce < conditional_entropy(joint, {y}, x) - kVFitSlack)
                throw numerical_error("v_conditional_entropy: fit below the Shannon floor");
            // first-order optimality as the convergence certificate: a large
            // gradient after the budget means the inf was not reached
            detail::CeProblem prob = detail::make_problem(joint, y, x, family.features);
            std::vector<double> theta = r.predictor.w;
            theta.insert(theta.end(), r.predictor.bias.begin(), r.predictor.bias.end());
            std::vector<double> g;
            prob.grad(theta, g);
            double worst = 0.0;
            for (double v : g) worst = std::max(worst, std::abs(v));
            if (worst > kVGradTol)
                throw numerical_error(
                    "v_conditional_entropy: fit not converged within budget; best value " +
                    std::to_string(r.final_ce));
            return r.final_ce;
        }
        default:
            break;
    }
    return entropy(joint, {y});
}

// I_V(X -> Y) = H_V(Y | empty) - H_V(Y | X), clamped at zero.
inline double v_information(const PredictiveFamily& family, const JointTable& joint,
                            const std::vector<std::string>& x, const std::string& y) {
    const double value = entropy(joint, {y}) - v_conditional_entropy(family, joint, y, x);
    const double slack =
        family.kind == PredictiveFamily::Kind::linear_softmax ? kVFitSlack + kVClampTol : kVClampTol;
    if (value < -slack)
        throw numerical_error("v_information: negative value " + std::to_string(value));
    return value < 0.0 ? 0.0 : value;
}

// I_V(C -> Y | X) via concatenation: the conditioning variable joins the
// side set. Reduces to Shannon I(C;Y|X) for the FULL family.
inline double v_conditional_information(const PredictiveFamily& family, const JointTable& joint,
                                        const std::string& c, const std::string& y,
                                        const std::vector<std::string>& x) {
    std::vector<std::string> extended = x;
    extended.push_back(c);
    const double value =
        v_conditional_entropy(family, joint, y, x) - v_conditional_entropy(family, joint, y, extended);
    const double slack =
        family.kind == PredictiveFamily::Kind::linear_softmax ? 2.0 * kVFitSlack + kVClampTol : kVClampTol;
    if (value < -slack)
        throw numerical_error("v_conditional_information: negative value " + std::to_string(value));
    return value < 0.0 ? 0.0 : value;
}

}  // namespace synergy
