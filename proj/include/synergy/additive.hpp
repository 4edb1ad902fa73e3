#pragma once

// The toy problem X = A + lambda*C with A ~ U{0..n_a-1}, C ~ U{0..n_c-1}
// independent. With lambda = p/q the sum a + (p/q)c collides exactly when the
// integer q*a + p*c does, so the whole analysis stays in exact arithmetic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "synergy/info.hpp"
#include "synergy/joint_table.hpp"
#include "synergy/rational.hpp"

namespace synergy {

struct AdditiveModel {
    int n_a = 2;
    int n_c = 2;
    Rational lambda{1};

    AdditiveModel(int na, int nc, Rational l) : n_a(na), n_c(nc), lambda(l) {
        if (n_a < 2 || n_c < 2) throw usage_error("AdditiveModel: need n_a >= 2 and n_c >= 2");
        if (!lambda.positive()) throw usage_error("AdditiveModel: lambda must be positive");
    }
};

namespace detail {
// Distinct sums q*a + p*c in ascending order with their multiplicities.
inline std::map<std::int64_t, int> sum_counts(const AdditiveModel& m) {
    std::map<std::int64_t, int> counts;
    for (int a = 0; a < m.n_a; ++a)
        for (int c = 0; c < m.n_c; ++c) ++counts[m.lambda.den * a + m.lambda.num * c];
    return counts;
}

// Symbol for the exact value (q*a + p*c)/q, reduced.
inline std::string sum_symbol(std::int64_t scaled, std::int64_t q) {
    return Rational(scaled, q).str();
}
}  // namespace detail

// Joint over (A, C, X); X's alphabet is the sorted set of distinct sums.
inline JointTable additive_joint(const AdditiveModel& m) {
    const auto counts = detail::sum_counts(m);
    Alphabet x{"X", {}};
    std::map<std::int64_t, std::size_t> x_index;
    for (const auto& [v, n] : counts) {
        x_index[v] = x.symbols.size();
        x.symbols.push_back(detail::sum_symbol(v, m.lambda.den));
    }
    std::vector<Alphabet> vars = {numbered_alphabet("A", m.n_a), numbered_alphabet("C", m.n_c), x};
    std::vector<double> cells(static_cast<std::size_t>(m.n_a) * m.n_c * x.size(), 0.0);
    const double mass = 1.0 / (static_cast<double>(m.n_a) * m.n_c);
    for (int a = 0; a < m.n_a; ++a)
        for (int c = 0; c < m.n_c; ++c) {
            const std::size_t xi = x_index.at(m.lambda.den * a + m.lambda.num * c);
            cells[(static_cast<std::size_t>(a) * m.n_c + c) * x.size() + xi] = mass;
        }
    return JointTable(std::move(vars), std::move(cells));
}

// H(X) straight from the sum multiplicities, bypassing the table machinery.
inline double additive_h_x(const AdditiveModel& m) {
    double h_x = 0.0;
    const double total = static_cast<double>(m.n_a) * m.n_c;
    for (const auto& [v, n] : detail::sum_counts(m)) {
        const double p = n / total;
        h_x -= p * std::log(p);
    }
    return h_x;
}

// I(A;C|X), computed two independent ways that must agree:
// the info-core enumeration and the identity ln n_a + ln n_c - H(X)
// (H(A) - H(A + lambda C) + H(lambda C) with uniform priors).
inline double additive_synergy_exact(const AdditiveModel& m) {
    const auto joint = additive_joint(m);
    const double by_enumeration = conditional_mutual_information(joint, {"A"}, {"C"}, {"X"});
    const double by_identity =
        std::log(double(m.n_a)) + std::log(double(m.n_c)) - additive_h_x(m);
    if (std::abs(by_enumeration - by_identity) > kIdentityTol)
        throw numerical_error("additive_synergy_exact: enumeration and identity disagree");
    return by_enumeration < 0.0 ? 0.0 : by_enumeration;
}

// Closed-form lower bound on the synergy at lambda = 1:
//   ln n_c - (1/n_a) [ (n_c-1) ln n_c - ((n_c-1)^2/n_c) ln(n_c-1) + (n_c-2)/2 ]
// Proven only for n_a >= n_c.
inline double additive_lower_bound(int n_a, int n_c) {
    if (n_c < 2) throw usage_error("additive_lower_bound: need n_c >= 2");
    if (n_a < n_c) throw domain_error("additive_lower_bound: bound unproven for n_a < n_c");
    const double nc = n_c;
    const double log_ncm1 = n_c == 2 ? 0.0 : std::log(nc - 1.0);
    const double bracket =
        (nc - 1.0) * std::log(nc) - ((nc - 1.0) * (nc - 1.0) / nc) * log_ncm1 + (nc - 2.0) / 2.0;
    return std::log(nc) - bracket / static_cast<double>(n_a);
}

// Per-lambda exact synergy over a user grid; the grid must contain 1 so the
// optimality claim is actually exercised.
inline std::vector<std::pair<Rational, double>> lambda_sweep(int n_a, int n_c,
                                                             const std::vector<Rational>& grid) {
    if (grid.empty()) throw usage_error("lambda_sweep: empty grid");
    if (std::find(grid.begin(), grid.end(), Rational(1)) == grid.end())
        throw usage_error("lambda_sweep: grid must contain lambda = 1");
    std::vector<std::pair<Rational, double>> out;
    out.reserve(grid.size());
    for (const auto& l : grid)
        out.emplace_back(l, additive_synergy_exact(AdditiveModel(n_a, n_c, l)));
    return out;
}

struct ActionSpaceRow {
    int n_a = 0;
    double exact = 0.0;
    double bound = 0.0;
};

// Exact synergy and closed-form bound along growing n_a (lambda = 1).
// The theorem's claims are enforced here: bound <= exact and bound strictly
// increasing.
inline std::vector<ActionSpaceRow> action_space_sweep(int n_c, const std::vector<int>& n_a_values) {
    if (n_a_values.empty()) throw usage_error("action_space_sweep: empty n_a list");
    std::vector<ActionSpaceRow> out;
    for (int n_a : n_a_values) {
        ActionSpaceRow row;
        row.n_a = n_a;
        row.exact = additive_synergy_exact(AdditiveModel(n_a, n_c, Rational(1)));
        row.bound = additive_lower_bound(n_a, n_c);
        if (row.bound > row.exact + kIdentityTol)
            throw numerical_error("action_space_sweep: bound exceeds exact synergy at n_a=" +
                                  std::to_string(n_a));
        out.push_back(row);
    }
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].n_a > out[i - 1].n_a && out[i].bound <= out[i - 1].bound)
            throw numerical_error("action_space_sweep: bound not strictly increasing");
    return out;
}

}  // namespace synergy
