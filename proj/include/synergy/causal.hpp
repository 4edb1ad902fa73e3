#pragma once

// The collider generative process as an executable object: a small DAG type
// with d-separation, CPD-parameterized models, and exact joint construction.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "synergy/errors.hpp"
#include "synergy/info.hpp"
#include "synergy/joint_table.hpp"
#include "synergy/rng.hpp"

namespace synergy {

class CausalDiagram {
  public:
    void add_node(const std::string& name) {
        if (index_of(name)) throw usage_error("CausalDiagram: duplicate node '" + name + "'");
        nodes_.push_back(name);
        parents_.emplace_back();
        children_.emplace_back();
    }

    void add_edge(const std::string& parent, const std::string& child) {
        const std::size_t p = require(parent), c = require(child);
        parents_[c].push_back(p);
        children_[p].push_back(c);
        if (!acyclic()) {
            parents_[c].pop_back();
            children_[p].pop_back();
            throw model_error("CausalDiagram: edge " + parent + "->" + child + " creates a cycle");
        }
    }

    const std::vector<std::string>& nodes() const { return nodes_; }

    std::vector<std::string> parents(const std::string& node) const {
        std::vector<std::string> out;
        for (std::size_t p : parents_[require(node)]) out.push_back(nodes_[p]);
        return out;
    }

    // Standard reachability ("Bayes-ball"): true iff every path between x and
    // y is blocked by z. Colliders are open when they or a descendant sit in z.
    bool d_separated(const std::vector<std::string>& x, const std::vector<std::string>& y,
                     const std::vector<std::string>& z) const {
        const auto xs = resolve(x), ys = resolve(y), zs = resolve(z);
        for (std::size_t i : xs)
            if (ys.count(i) || zs.count(i)) throw usage_error("d_separated: node sets overlap");
        for (std::size_t i : ys)
            if (zs.count(i)) throw usage_error("d_separated: node sets overlap");

        // ancestors of z (inclusive)
        std::set<std::size_t> anc(zs.begin(), zs.end());
        std::deque<std::size_t> work(zs.begin(), zs.end());
        while (!work.empty()) {
            const std::size_t n = work.front();
            work.pop_front();
            for (std::size_t p : parents_[n])
                if (anc.insert(p).second) work.push_back(p);
        }

        // visit states: (node, direction) with direction = entered from child
        // (up) or from parent (down)
        enum Dir { up = 0, down = 1 };
        std::set<std::pair<std::size_t, int>> visited;
        std::deque<std::pair<std::size_t, int>> frontier;
        for (std::size_t s : xs) frontier.push_back({s, up});
        while (!frontier.empty()) {
            const auto [n, dir] = frontier.front();
            frontier.pop_front();
            if (!visited.insert({n, dir}).second) continue;
            if (!zs.count(n) && ys.count(n)) return false;
            if (dir == up && !zs.count(n)) {
                for (std::size_t p : parents_[n]) frontier.push_back({p, up});
                for (std::size_t c : children_[n]) frontier.push_back({c, down});
            } else if (dir == down) {
                if (!zs.count(n))
                    for (std::size_t c : children_[n]) frontier.push_back({c, down});
                if (anc.count(n))  // collider or observed ancestor opens upward
                    for (std::size_t p : parents_[n]) frontier.push_back({p, up});
            }
        }
        return true;
    }

    // Fig. 1: C, S, Abar feed the raw input Xbar; the augmented input X sees
    // Xbar and A; the representation Z sees only X.
    static CausalDiagram collider_default() {
        CausalDiagram d;
        for (const char* n : {"C", "S", "Abar", "A", "Xbar", "X", "Z"}) d.add_node(n);
        d.add_edge("C", "Xbar");
        d.add_edge("S", "Xbar");
        d.add_edge("Abar", "Xbar");
        d.add_edge("Xbar", "X");
        d.add_edge("A", "X");
        d.add_edge("X", "Z");
        return d;
    }

  private:
    std::vector<std::string> nodes_;
    std::vector<std::vector<std::size_t>> parents_, children_;

    std::optional<std::size_t> index_of(const std::string& name) const {
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i] == name) return i;
        return std::nullopt;
    }
    std::size_t require(const std::string& name) const {
        if (auto i = index_of(name)) return *i;
        throw name_error("CausalDiagram: unknown node '" + name + "'");
    }
    std::set<std::size_t> resolve(const std::vector<std::string>& names) const {
        std::set<std::size_t> out;
        for (const auto& n : names) out.insert(require(n));
        return out;
    }
    bool acyclic() const {
        std::vector<int> indeg(nodes_.size(), 0);
        for (std::size_t c = 0; c < nodes_.size(); ++c) indeg[c] = static_cast<int>(parents_[c].size());
        std::deque<std::size_t> q;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (indeg[i] == 0) q.push_back(i);
        std::size_t seen = 0;
        while (!q.empty()) {
            const std::size_t n = q.front();
            q.pop_front();
            ++seen;
            for (std::size_t c : children_[n])
                if (--indeg[c] == 0) q.push_back(c);
        }
        return seen == nodes_.size();
    }
};

// One conditional distribution table: a row per parent-symbol combination
// (row-major over the parent list), each row a distribution over the child.
struct Cpd {
    std::string child;
    std::vector<std::string> parents;
    std::size_t child_size = 0;
    std::vector<std::vector<double>> rows;

    void validate(std::size_t expected_rows) const {
        if (rows.size() != expected_rows)
            throw model_error("Cpd '" + child + "': expected " + std::to_string(expected_rows) +
                              " rows, got " + std::to_string(rows.size()));
        for (const auto& r : rows) {
            if (r.size() != child_size) throw model_error("Cpd '" + child + "': row length mismatch");
            double total = 0.0;
            for (double x : r) {
                if (!(x >= 0.0)) throw model_error("Cpd '" + child + "': negative entry");
                total += x;
            }
            if (std::abs(total - 1.0) > kNormalizationTol)
                throw model_error("Cpd '" + child + "': row sums to " + std::to_string(total));
        }
    }
};

struct ColliderSizes {
    std::size_t c = 2, a = 2, xbar = 2, x = 4;
    std::size_t s = 1, abar = 1;  // singletons by default, matching Fig. 1 minimal use
};

// Fully parameterized Fig. 1 process. The encoder is optional and
// deterministic; when absent the joint stops at X.
struct ColliderModel {
    ColliderSizes sizes;
    std::vector<double> prior_c, prior_s, prior_abar, prior_a;
    Cpd generator;  // Xbar | (C, S, Abar)
    Cpd transform;  // X | (Xbar, A)
    std::optional<std::vector<std::size_t>> encoder;  // X -> Z
    std::size_t z_size = 0;
};

namespace detail {
inline void check_prior(const std::vector<double>& p, std::size_t n, const char* name) {
    if (p.size() != n) throw model_error(std::string("ColliderModel: prior ") + name + " has wrong size");
    double total = 0.0;
    for (double x : p) {
        if (!(x >= 0.0)) throw model_error(std::string("ColliderModel: negative prior entry in ") + name);
        total += x;
    }
    if (std::abs(total - 1.0) > kNormalizationTol)
        throw model_error(std::string("ColliderModel: prior ") + name + " not normalized");
}
}  // namespace detail

// Multiplies the kernels along the diagram into one exact joint over
// (C, S, Abar, A, Xbar, X[, Z]). Root independence gives I(A;C) = 0 by
// construction.
inline JointTable build_collider_joint(const ColliderModel& m) {
    const auto& sz = m.sizes;
    detail::check_prior(m.prior_c, sz.c, "C");
    detail::check_prior(m.prior_s, sz.s, "S");
    detail::check_prior(m.prior_abar, sz.abar, "Abar");
    detail::check_prior(m.prior_a, sz.a, "A");
    m.generator.validate(sz.c * sz.s * sz.abar);
    m.transform.validate(sz.xbar * sz.a);
    if (m.generator.child_size != sz.xbar || m.transform.child_size != sz.x)
        throw model_error("ColliderModel: kernel child size mismatch");
    if (m.encoder) {
        if (m.encoder->size() != sz.x || m.z_size == 0)
            throw model_error("ColliderModel: encoder map size mismatch");
        for (std::size_t z : *m.encoder)
            if (z >= m.z_size) throw model_error("ColliderModel: encoder image out of range");
    }

    std::vector<Alphabet> vars = {numbered_alphabet("C", sz.c),   numbered_alphabet("S", sz.s),
                                  numbered_alphabet("Abar", sz.abar), numbered_alphabet("A", sz.a),
                                  numbered_alphabet("Xbar", sz.xbar), numbered_alphabet("X", sz.x)};
    std::vector<double> cells;
    cells.reserve(sz.c * sz.s * sz.abar * sz.a * sz.xbar * sz.x);
    for (std::size_t c = 0; c < sz.c; ++c)
        for (std::size_t s = 0; s < sz.s; ++s)
            for (std::size_t ab = 0; ab < sz.abar; ++ab)
                for (std::size_t a = 0; a < sz.a; ++a)
                    for (std::size_t xb = 0; xb < sz.xbar; ++xb) {
                        const double base = m.prior_c[c] * m.prior_s[s] * m.prior_abar[ab] *
                                            m.prior_a[a] *
                                            m.generator.rows[(c * sz.s + s) * sz.abar + ab][xb];
                        const auto& trow = m.transform.rows[xb * sz.a + a];
                        for (std::size_t x = 0; x < sz.x; ++x) cells.push_back(base * trow[x]);
                    }
    JointTable joint(vars, cells);
    if (!m.encoder) return joint;
    const auto& enc = *m.encoder;
    return joint.extend_deterministic(numbered_alphabet("Z", m.z_size), {"X"},
                                      [&](const std::vector<std::size_t>& v) { return enc[v[0]]; });
}

// Random CPDs, every row an independent symmetric Dirichlet draw. Continuous
// over the simplex interior, so the measure-zero exceptions of the
// explaining-away lemma are (almost) never hit.
inline ColliderModel sample_random_model(const ColliderSizes& sizes, std::uint64_t seed,
                                         double concentration = 1.0) {
    if (sizes.c < 2 || sizes.a < 2 || sizes.xbar < 2 || sizes.x < 2)
        throw usage_error("sample_random_model: C, A, Xbar, X sizes must be >= 2");
    if (sizes.s < 1 || sizes.abar < 1)
        throw usage_error("sample_random_model: S, Abar sizes must be >= 1");
    std::mt19937_64 g(seed);
    ColliderModel m;
    m.sizes = sizes;
    m.prior_c = dirichlet(g, sizes.c, concentration);
    m.prior_s = dirichlet(g, sizes.s, concentration);
    m.prior_abar = dirichlet(g, sizes.abar, concentration);
    m.prior_a = dirichlet(g, sizes.a, concentration);
    m.generator = Cpd{"Xbar", {"C", "S", "Abar"}, sizes.xbar, {}};
    for (std::size_t r = 0; r < sizes.c * sizes.s * sizes.abar; ++r)
        m.generator.rows.push_back(dirichlet(g, sizes.xbar, concentration));
    m.transform = Cpd{"X", {"Xbar", "A"}, sizes.x, {}};
    for (std::size_t r = 0; r < sizes.xbar * sizes.a; ++r)
        m.transform.rows.push_back(dirichlet(g, sizes.x, concentration));
    return m;
}

struct ExplainAwayReport {
    double i_ac = 0.0;
    double i_ac_given_x = 0.0;
    std::optional<double> i_ac_given_z;
    bool verdict = false;  // marginally independent AND dependent given X
};

inline ExplainAwayReport check_explaining_away(const JointTable& joint) {
    for (const char* v : {"A", "C", "X"})
        if (!joint.has_variable(v))
            throw name_error(std::string("check_explaining_away: missing variable ") + v);
    ExplainAwayReport r;
    r.i_ac = mutual_information(joint, {"A"}, {"C"});
    r.i_ac_given_x = conditional_mutual_information(joint, {"A"}, {"C"}, {"X"});
    if (joint.has_variable("Z"))
        r.i_ac_given_z = conditional_mutual_information(joint, {"A"}, {"C"}, {"Z"});
    r.verdict = (r.i_ac <= 1e-9) && (r.i_ac_given_x > 1e-9);
    return r;
}

}  // namespace synergy
