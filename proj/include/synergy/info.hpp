#pragma once

// Shannon quantities on exact joint tables. Everything is in nats with the
// 0*ln(0) = 0 convention; conversion to bits is a display concern.

#include <cmath>
#include <string>
#include <vector>

#include "synergy/joint_table.hpp"

namespace synergy {

inline constexpr double kIdentityTol = 1e-10;  // information-identity test tolerance
inline constexpr double kClampTol = 1e-12;     // rounding clamp for MI/CMI

namespace detail {

// Marginal probabilities over a variable subset, accumulated in place.
inline std::vector<double> marginal_probs(const JointTable& t, const std::vector<std::size_t>& idx) {
    std::vector<std::size_t> stride(idx.size(), 1);
    for (std::size_t i = idx.size(); i-- > 1;)
        stride[i - 1] = stride[i] * t.vars()[idx[i]].size();
    const std::size_t cells = idx.empty() ? 1 : stride[0] * t.vars()[idx[0]].size();
    std::vector<double> m(cells, 0.0);
    const auto& p = t.probs();
    for (std::size_t cell = 0; cell < p.size(); ++cell) {
        if (p[cell] == 0.0) continue;
        std::size_t flat = 0;
        for (std::size_t i = 0; i < idx.size(); ++i) flat += t.symbol_at(cell, idx[i]) * stride[i];
        m[flat] += p[cell];
    }
    return m;
}

inline double entropy_of(const std::vector<double>& probs) {
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h < 0.0 ? 0.0 : h;  // tiny negative zero only
}

inline std::vector<std::size_t> union_indices(const JointTable& t, const std::vector<std::string>& a,
                                              const std::vector<std::string>& b,
                                              const char* op) {
    std::vector<std::string> names = a;
    for (const auto& n : b) names.push_back(n);
    try {
        return t.var_indices(names);
    } catch (const name_error&) {
        throw;  // unknown variable, not an overlap
    } catch (const usage_error&) {
        throw usage_error(std::string(op) + ": variable sets overlap or repeat");
    }
}

}  // namespace detail

// H(vars) = -sum p ln p over the marginal.
inline double entropy(const JointTable& t, const std::vector<std::string>& vars) {
    if (vars.empty()) throw usage_error("entropy: empty variable set");
    return detail::entropy_of(detail::marginal_probs(t, t.var_indices(vars)));
}

// H(target | given) = H(target u given) - H(given).
inline double conditional_entropy(const JointTable& t, const std::vector<std::string>& target,
                                  const std::vector<std::string>& given) {
    if (target.empty()) throw usage_error("conditional_entropy: empty target set");
    if (given.empty()) return entropy(t, target);
    const auto joint_idx = detail::union_indices(t, target, given, "conditional_entropy");
    const double h_joint = detail::entropy_of(detail::marginal_probs(t, joint_idx));
    const double h_given = detail::entropy_of(detail::marginal_probs(t, t.var_indices(given)));
    const double h = h_joint - h_given;
    return h < 0.0 ? 0.0 : h;
}

// I(a;b) = H(a) + H(b) - H(a,b), clamped against rounding.
inline double mutual_information(const JointTable& t, const std::vector<std::string>& a,
                                 const std::vector<std::string>& b) {
    const auto joint_idx = detail::union_indices(t, a, b, "mutual_information");
    const double h_ab = detail::entropy_of(detail::marginal_probs(t, joint_idx));
    const double mi = entropy(t, a) + entropy(t, b) - h_ab;
    if (mi < 0.0) {
        if (mi < -kClampTol)
            throw numerical_error("mutual_information: negative value " + std::to_string(mi));
        return 0.0;
    }
    return mi;
}

// I(a;b|g) = H(a|g) - H(a | b u g). Negative values beyond rounding noise
// mean the table or the caller is broken, so they throw.
inline double conditional_mutual_information(const JointTable& t, const std::vector<std::string>& a,
                                             const std::vector<std::string>& b,
                                             const std::vector<std::string>& given) {
    if (given.empty()) return mutual_information(t, a, b);
    (void)detail::union_indices(t, a, b, "conditional_mutual_information");
    (void)detail::union_indices(t, a, given, "conditional_mutual_information");
    (void)detail::union_indices(t, b, given, "conditional_mutual_information");
    std::vector<std::string> b_given = b;
    for (const auto& n : given) b_given.push_back(n);
    const double cmi = conditional_entropy(t, a, given) - conditional_entropy(t, a, b_given);
    if (cmi < 0.0) {
        if (cmi < -kClampTol)
            throw numerical_error("conditional_mutual_information: negative value " + std::to_string(cmi));
        return 0.0;
    }
    return cmi;
}

// Interaction information I(a;b;c) = I(a;b) - I(a;b|c); symmetric in its
// three arguments and legitimately negative for colliders.
inline double interaction_information(const JointTable& t, const std::vector<std::string>& a,
                                      const std::vector<std::string>& b,
                                      const std::vector<std::string>& c) {
    (void)detail::union_indices(t, a, c, "interaction_information");
    return mutual_information(t, a, b) - conditional_mutual_information(t, a, b, c);
}

}  // namespace synergy
