#pragma once

// Deterministic encoders Z = F(X) over finite alphabets, and the
// representation-level reports built on top of them: the class-feature
// gain identity, the two-augmentation decomposition, and the
// generalization bound in both its printed and proof-implied forms.
//
// Everything here stays exact: an encoder is a lookup table, applying it
// is a deterministic extension of the joint, and the reports are plain
// entropy arithmetic on the extended table.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "synergy/errors.hpp"
#include "synergy/info.hpp"
#include "synergy/joint_table.hpp"
#include "synergy/rng.hpp"

namespace synergy {

// Total map from domain symbols to codomain symbols, stored as codomain
// indices so composition and comparison stay cheap.
struct Encoder {
    Alphabet domain;
    Alphabet codomain;
    std::vector<std::size_t> map;  // map[i] = codomain index of domain symbol i

    Encoder(Alphabet dom, Alphabet cod, std::vector<std::size_t> table)
        : domain(std::move(dom)), codomain(std::move(cod)), map(std::move(table)) {
        if (map.size() != domain.size())
            throw usage_error("Encoder: map must cover every domain symbol");
        for (std::size_t v : map)
            if (v >= codomain.size())
                throw usage_error("Encoder: map image outside codomain");
    }
};

inline Encoder identity_encoder(const Alphabet& x, const std::string& z_name = "Z") {
    std::vector<std::size_t> table(x.size());
    for (std::size_t i = 0; i < table.size(); ++i) table[i] = i;
    return Encoder(x, Alphabet{z_name, x.symbols}, std::move(table));
}

inline Encoder constant_encoder(const Alphabet& x, const Alphabet& z, std::size_t value = 0) {
    if (value >= z.size()) throw usage_error("constant_encoder: value outside codomain");
    return Encoder(x, z, std::vector<std::size_t>(x.size(), value));
}

// Appends output = enc(input) to the table. The input variable must carry
// exactly the encoder's domain symbols; names may differ (the encoder is
// reusable across identically-shaped variables).
inline JointTable apply_encoder(const JointTable& joint, const Encoder& enc,
                                const std::string& input = "X",
                                const std::string& output = "Z") {
    const Alphabet& in = joint.alphabet(input);
    if (in.symbols != enc.domain.symbols)
        throw usage_error("apply_encoder: alphabet of '" + input +
                          "' does not match encoder domain");
    Alphabet out{output, enc.codomain.symbols};
    return joint.extend_deterministic(
        out, {input}, [&enc](const std::vector<std::size_t>& arg) { return enc.map[arg[0]]; });
}

// Invertible relabeling of the class variable; appending phi(C) to a
// representation is the paper-level construction this module verifies.
struct ClassFeatureMap {
    Alphabet domain;
    Alphabet codomain;
    std::vector<std::size_t> phi;  // bijection, domain index -> codomain index

    ClassFeatureMap(Alphabet dom, Alphabet cod, std::vector<std::size_t> table)
        : domain(std::move(dom)), codomain(std::move(cod)), phi(std::move(table)) {
        if (codomain.size() != domain.size() || phi.size() != domain.size())
            throw usage_error("ClassFeatureMap: phi must be a bijection");
        std::vector<bool> hit(codomain.size(), false);
        for (std::size_t v : phi) {
            if (v >= codomain.size() || hit[v])
                throw usage_error("ClassFeatureMap: phi must be a bijection");
            hit[v] = true;
        }
    }
};

inline ClassFeatureMap identity_feature_map(const Alphabet& c,
                                            const std::string& name = "Zc") {
    std::vector<std::size_t> table(c.size());
    for (std::size_t i = 0; i < table.size(); ++i) table[i] = i;
    return ClassFeatureMap(c, Alphabet{name, c.symbols}, std::move(table));
}

struct ClassFeatureGain {
    double i_a_z = 0.0;
    double i_a_ztilde = 0.0;  // I(A; [Z, phi(C)])
    double gain = 0.0;        // i_a_ztilde - i_a_z, equals I(A;C|Z)
    double i_c_z = 0.0;
    double i_c_ztilde = 0.0;
};

namespace detail {

inline std::string fresh_var_name(const JointTable& joint, std::string base) {
    while (joint.has_variable(base)) base += '\'';
    return base;
}

}  // namespace detail

// Materializes Z_C = phi(C), then measures what appending it buys. The
// exact identity gain = I(A;C|Z) is enforced here rather than trusted:
// it is the checkable core of the class-feature theorem.
inline ClassFeatureGain class_feature_gain(const JointTable& joint, const ClassFeatureMap& phi,
                                           const std::string& a = "A",
                                           const std::string& c = "C",
                                           const std::string& z = "Z") {
    const Alphabet& cls = joint.alphabet(c);
    if (cls.symbols != phi.domain.symbols)
        throw usage_error("class_feature_gain: alphabet of '" + c +
                          "' does not match phi domain");
    const std::string zc = detail::fresh_var_name(joint, phi.codomain.name);
    const JointTable ext = joint.extend_deterministic(
        Alphabet{zc, phi.codomain.symbols}, {c},
        [&phi](const std::vector<std::size_t>& arg) { return phi.phi[arg[0]]; });

    ClassFeatureGain r;
    r.i_a_z = mutual_information(ext, {a}, {z});
    r.i_a_ztilde = mutual_information(ext, {a}, {z, zc});
    r.gain = r.i_a_ztilde - r.i_a_z;
    r.i_c_z = mutual_information(ext, {c}, {z});
    r.i_c_ztilde = mutual_information(ext, {c}, {z, zc});

    const double cmi = conditional_mutual_information(ext, {a}, {c}, {z});
    if (std::abs(r.gain - cmi) > kIdentityTol)
        throw numerical_error("class_feature_gain: gain deviates from I(A;C|Z)");
    if (r.i_c_ztilde < r.i_c_z - kIdentityTol)
        throw numerical_error("class_feature_gain: appending phi(C) lost class information");
    return r;
}

struct MultivariateReport {
    double joint_cmi = 0.0;         // I(A1,A2;C|Z)
    double cmi_a1 = 0.0;            // I(A1;C|Z)
    double cmi_a2 = 0.0;            // I(A2;C|Z)
    double inc_a2_after_a1 = 0.0;   // I(A2;C|Z,A1)
    double inc_a1_after_a2 = 0.0;   // I(A1;C|Z,A2)
    double gain = 0.0;              // max of the two increments
};

// Chain-rule split of the joint conditional dependence across two
// augmentation variables. Both decompositions are computed and must agree
// with the joint value; monotonicity over each single variable follows.
inline MultivariateReport multivariate_decomposition(const JointTable& joint,
                                                     const std::string& a1,
                                                     const std::string& a2,
                                                     const std::string& c = "C",
                                                     const std::string& z = "Z") {
    MultivariateReport r;
    r.joint_cmi = conditional_mutual_information(joint, {a1, a2}, {c}, {z});
    r.cmi_a1 = conditional_mutual_information(joint, {a1}, {c}, {z});
    r.cmi_a2 = conditional_mutual_information(joint, {a2}, {c}, {z});
    r.inc_a2_after_a1 = conditional_mutual_information(joint, {a2}, {c}, {z, a1});
    r.inc_a1_after_a2 = conditional_mutual_information(joint, {a1}, {c}, {z, a2});
    r.gain = std::max(r.inc_a2_after_a1, r.inc_a1_after_a2);

    if (std::abs(r.joint_cmi - (r.cmi_a1 + r.inc_a2_after_a1)) > kIdentityTol ||
        std::abs(r.joint_cmi - (r.cmi_a2 + r.inc_a1_after_a2)) > kIdentityTol)
        throw numerical_error("multivariate_decomposition: chain rule violated");
    if (r.joint_cmi < std::max(r.cmi_a1, r.cmi_a2) - kIdentityTol)
        throw numerical_error("multivariate_decomposition: joint CMI below a marginal CMI");
    return r;
}

struct BoundReport {
    double i_z_a = 0.0;
    double i_z_c = 0.0;
    double i_x_a_given_c = 0.0;
    double i_z_a_given_c = 0.0;
    double stated_rhs = 0.0;  // i_z_c - i_x_a_given_c, the inequality as printed
    double proof_rhs = 0.0;   // i_z_c + i_x_a_given_c, what the proof chain yields
    bool stated_holds = false;
    bool proof_holds = false;
};

// The printed bound and the proof-implied bound differ by the sign of the
// I(X;A|C) term; this report computes both and lets the caller (and the
// test suite) see which one survives contact with small exact models.
inline BoundReport generalization_bound_report(const JointTable& joint,
                                               const std::string& x = "X",
                                               const std::string& z = "Z",
                                               const std::string& a = "A",
                                               const std::string& c = "C") {
    BoundReport r;
    r.i_z_a = mutual_information(joint, {z}, {a});
    r.i_z_c = mutual_information(joint, {z}, {c});
    r.i_x_a_given_c = conditional_mutual_information(joint, {x}, {a}, {c});
    r.i_z_a_given_c = conditional_mutual_information(joint, {z}, {a}, {c});
    r.stated_rhs = r.i_z_c - r.i_x_a_given_c;
    r.proof_rhs = r.i_z_c + r.i_x_a_given_c;
    r.stated_holds = r.i_z_a <= r.stated_rhs + kIdentityTol;
    r.proof_holds = r.i_z_a <= r.proof_rhs + kIdentityTol;
    return r;
}

// Streams every total map domain -> codomain exactly once, in
// lexicographic order of the map table (first entry most significant).
// The count |codomain|^|domain| is checked against a cap up front so a
// typo in alphabet sizes fails fast instead of iterating forever.
class EncoderEnumerator {
  public:
    static constexpr std::uint64_t kDefaultCap = 10'000'000;

    EncoderEnumerator(Alphabet domain, Alphabet codomain, std::uint64_t cap = kDefaultCap)
        : domain_(std::move(domain)), codomain_(std::move(codomain)) {
        if (domain_.size() == 0 || codomain_.size() == 0)
            throw usage_error("EncoderEnumerator: empty alphabet");
        total_ = 1;
        for (std::size_t i = 0; i < domain_.size(); ++i) {
            if (total_ > cap / codomain_.size())
                throw resource_error("EncoderEnumerator: |codomain|^|domain| exceeds cap");
            total_ *= codomain_.size();
        }
        table_.assign(domain_.size(), 0);
    }

    std::uint64_t total() const { return total_; }

    // Returns the next encoder, or nothing once the stream is exhausted.
    std::optional<Encoder> next() {
        if (done_) return std::nullopt;
        Encoder out(domain_, codomain_, table_);
        // odometer increment, last position fastest
        std::size_t i = table_.size();
        while (i > 0) {
            --i;
            if (++table_[i] < codomain_.size()) break;
            table_[i] = 0;
            if (i == 0) done_ = true;
        }
        return out;
    }

  private:
    Alphabet domain_;
    Alphabet codomain_;
    std::vector<std::size_t> table_;
    std::uint64_t total_ = 0;
    bool done_ = false;
};

// Fallback when the full sweep would blow the cap: uniform over all maps.
inline Encoder sample_encoder(const Alphabet& domain, const Alphabet& codomain,
                              std::mt19937_64& gen) {
    if (domain.size() == 0 || codomain.size() == 0)
        throw usage_error("sample_encoder: empty alphabet");
    std::vector<std::size_t> table(domain.size());
    for (auto& v : table) v = static_cast<std::size_t>(uniform_below(gen, codomain.size()));
    return Encoder(domain, codomain, std::move(table));
}

}  // namespace synergy
