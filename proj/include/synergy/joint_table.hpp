#pragma once

// Exact finite joint distributions over named categorical variables.
// Probabilities live in a dense row-major array (last listed variable varies
// fastest); every information quantity downstream reduces to sums over this
// array, so tables are validated once on construction and then immutable.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "synergy/errors.hpp"

namespace synergy {

inline constexpr double kNormalizationTol = 1e-12;

struct Alphabet {
    std::string name;
    std::vector<std::string> symbols;

    std::size_t size() const { return symbols.size(); }

    std::size_t index_of(const std::string& symbol) const {
        for (std::size_t i = 0; i < symbols.size(); ++i)
            if (symbols[i] == symbol) return i;
        throw name_error("Alphabet '" + name + "': unknown symbol '" + symbol + "'");
    }

    friend bool operator==(const Alphabet& a, const Alphabet& b) {
        return a.name == b.name && a.symbols == b.symbols;
    }
};

// Convenience: symbols "0".."n-1".
inline Alphabet numbered_alphabet(const std::string& name, std::size_t n) {
    Alphabet a{name, {}};
    a.symbols.reserve(n);
    for (std::size_t i = 0; i < n; ++i) a.symbols.push_back(std::to_string(i));
    return a;
}

class JointTable {
  public:
    JointTable(std::vector<Alphabet> vars, std::vector<double> probs)
        : vars_(std::move(vars)), p_(std::move(probs)) {
        if (vars_.empty()) throw usage_error("JointTable: no variables");
        std::size_t cells = 1;
        std::set<std::string> names;
        for (const auto& v : vars_) {
            if (v.symbols.empty()) throw usage_error("JointTable: empty alphabet '" + v.name + "'");
            if (!names.insert(v.name).second)
                throw usage_error("JointTable: duplicate variable '" + v.name + "'");
            std::set<std::string> syms(v.symbols.begin(), v.symbols.end());
            if (syms.size() != v.symbols.size())
                throw usage_error("JointTable: duplicate symbol in '" + v.name + "'");
            cells *= v.size();
        }
        if (p_.size() != cells)
            throw usage_error("JointTable: expected " + std::to_string(cells) + " probabilities, got " +
                              std::to_string(p_.size()));
        double total = 0.0;
        for (double x : p_) {
            if (!(x >= 0.0)) throw usage_error("JointTable: negative or NaN probability");
            total += x;
        }
        if (std::abs(total - 1.0) > kNormalizationTol)
            throw numerical_error("JointTable: probabilities sum to " + std::to_string(total));
        strides_.assign(vars_.size(), 1);
        for (std::size_t i = vars_.size(); i-- > 1;)
            strides_[i - 1] = strides_[i] * vars_[i].size();
    }

    const std::vector<Alphabet>& vars() const { return vars_; }
    const std::vector<double>& probs() const { return p_; }
    std::size_t cell_count() const { return p_.size(); }
    std::size_t stride(std::size_t var) const { return strides_[var]; }

    std::size_t var_index(const std::string& name) const {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i].name == name) return i;
        throw name_error("JointTable: unknown variable '" + name + "'");
    }

    const Alphabet& alphabet(const std::string& name) const { return vars_[var_index(name)]; }
    bool has_variable(const std::string& name) const {
        return std::any_of(vars_.begin(), vars_.end(),
                           [&](const Alphabet& v) { return v.name == name; });
    }

    // Symbol index of `var` inside flat cell index `cell`.
    std::size_t symbol_at(std::size_t cell, std::size_t var) const {
        return (cell / strides_[var]) % vars_[var].size();
    }

    std::vector<std::size_t> var_indices(const std::vector<std::string>& names) const {
        std::vector<std::size_t> out;
        out.reserve(names.size());
        std::set<std::string> seen;
        for (const auto& n : names) {
            if (!seen.insert(n).second) throw usage_error("JointTable: duplicate variable '" + n + "' in set");
            out.push_back(var_index(n));
        }
        return out;
    }

    // Marginal over `keep`, variables retaining this table's order.
    JointTable marginalize(const std::vector<std::string>& keep) const {
        if (keep.empty()) throw usage_error("marginalize: empty keep set");
        std::vector<std::size_t> idx = var_indices(keep);
        std::sort(idx.begin(), idx.end());
        std::vector<Alphabet> kept;
        for (std::size_t i : idx) kept.push_back(vars_[i]);
        std::vector<std::size_t> kstride(idx.size(), 1);
        for (std::size_t i = idx.size(); i-- > 1;)
            kstride[i - 1] = kstride[i] * vars_[idx[i]].size();
        std::size_t cells = kstride.empty() ? 1 : kstride[0] * vars_[idx[0]].size();
        std::vector<double> out(cells, 0.0);
        for (std::size_t cell = 0; cell < p_.size(); ++cell) {
            if (p_[cell] == 0.0) continue;
            std::size_t flat = 0;
            for (std::size_t i = 0; i < idx.size(); ++i) flat += symbol_at(cell, idx[i]) * kstride[i];
            out[flat] += p_[cell];
        }
        return JointTable(std::move(kept), std::move(out));
    }

    // Appends a deterministic variable computed from existing ones; the
    // marginal over the original variables is untouched.
    JointTable extend_deterministic(const Alphabet& out_var, const std::vector<std::string>& inputs,
                                    const std::function<std::size_t(const std::vector<std::size_t>&)>& fn) const {
        if (has_variable(out_var.name))
            throw usage_error("extend_deterministic: variable '" + out_var.name + "' already present");
        const std::vector<std::size_t> in_idx = var_indices(inputs);
        std::vector<Alphabet> vars = vars_;
        vars.push_back(out_var);
        std::vector<double> out(p_.size() * out_var.size(), 0.0);
        std::vector<std::size_t> arg(in_idx.size(), 0);
        for (std::size_t cell = 0; cell < p_.size(); ++cell) {
            for (std::size_t i = 0; i < in_idx.size(); ++i) arg[i] = symbol_at(cell, in_idx[i]);
            const std::size_t z = fn(arg);
            if (z >= out_var.size()) throw usage_error("extend_deterministic: image out of range");
            out[cell * out_var.size() + z] += p_[cell];
        }
        return JointTable(std::move(vars), std::move(out));
    }

  private:
    std::vector<Alphabet> vars_;
    std::vector<double> p_;
    std::vector<std::size_t> strides_;
};

}  // namespace synergy
