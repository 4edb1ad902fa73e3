#pragma once

// Config-driven experiment runner behind the synergy-lab CLI. Each
// experiment reads a strict JSON config (unknown keys rejected), drives the
// corresponding library routines, and returns flat rows with a stable
// column order shared by the csv, json and plotdata emitters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "synergy/additive.hpp"
#include "synergy/causal.hpp"
#include "synergy/encoder.hpp"
#include "synergy/errors.hpp"
#include "synergy/estimator.hpp"
#include "synergy/info.hpp"
#include "synergy/serialize.hpp"
#include "synergy/vinfo.hpp"
#include "synergy/zoo.hpp"

namespace synergy {

// One typed cell of a result row. Numbers print at 12 significant digits;
// cells flagged as nats are rescaled when bits output is requested; cells
// flagged as verdicts turn the whole run into exit code 2 when false.
struct ReportValue {
    enum class Kind { number, integer, boolean, text };
    Kind kind = Kind::number;
    double num = 0.0;
    long long inum = 0;
    bool flag = false;
    std::string text;
    bool nats = false;
    bool verdict = false;
};

struct ReportRow {
    std::vector<std::pair<std::string, ReportValue>> fields;

    void num(const std::string& name, double v, bool in_nats = false) {
        if (!std::isfinite(v))
            throw numerical_error("report row: non-finite value in column '" + name + "'");
        ReportValue r;
        r.kind = ReportValue::Kind::number;
        r.num = v;
        r.nats = in_nats;
        fields.emplace_back(name, r);
    }
    void integer(const std::string& name, long long v) {
        ReportValue r;
        r.kind = ReportValue::Kind::integer;
        r.inum = v;
        fields.emplace_back(name, r);
    }
    void boolean(const std::string& name, bool v, bool is_verdict = false) {
        ReportValue r;
        r.kind = ReportValue::Kind::boolean;
        r.flag = v;
        r.verdict = is_verdict;
        fields.emplace_back(name, r);
    }
    void verdict(const std::string& name, bool v) { boolean(name, v, true); }
    void text(const std::string& name, std::string v) {
        ReportValue r;
        r.kind = ReportValue::Kind::text;
        r.text = std::move(v);
        fields.emplace_back(name, r);
    }
    const ReportValue* find(const std::string& name) const {
        for (const auto& f : fields)
            if (f.first == name) return &f.second;
        return nullptr;
    }
};

struct RunResult {
    std::vector<ReportRow> rows;
    std::string plot_x, plot_y;  // columns the plotdata emitter prints
};

struct ExperimentConfig {
    std::string experiment;
    nlohmann::json parameters;  // full config document, validated per experiment
    std::uint64_t seed = 0;
    std::string output_path;
};

namespace detail {

inline void expect_keys(const nlohmann::json& doc, std::initializer_list<const char*> allowed,
                        const std::string& where) {
    if (!doc.is_object()) throw config_error(where + ": expected a JSON object");
    for (const auto& item : doc.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) known = true;
        if (!known) throw config_error(where + ": unknown key '" + item.key() + "'");
    }
}

inline long long config_int(const nlohmann::json& doc, const char* key,
                            std::optional<long long> fallback = std::nullopt) {
    if (!doc.contains(key)) {
        if (fallback) return *fallback;
        throw config_error(std::string("missing required key '") + key + "'");
    }
    const auto& v = doc.at(key);
    if (!v.is_number_integer())
        throw config_error(std::string("key '") + key + "' must be an integer");
    return v.get<long long>();
}

inline double config_num(const nlohmann::json& doc, const char* key, double fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_number()) throw config_error(std::string("key '") + key + "' must be a number");
    return v.get<double>();
}

inline std::string config_str(const nlohmann::json& doc, const char* key,
                              std::optional<std::string> fallback = std::nullopt) {
    if (!doc.contains(key)) {
        if (fallback) return *fallback;
        throw config_error(std::string("missing required key '") + key + "'");
    }
    const auto& v = doc.at(key);
    if (!v.is_string()) throw config_error(std::string("key '") + key + "' must be a string");
    return v.get<std::string>();
}

// A rational config value: an integer, a [num, den] pair, or "p/q".
inline Rational config_rational(const nlohmann::json& v, const std::string& where) {
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer())
        return Rational(v[0].get<std::int64_t>(), v[1].get<std::int64_t>());
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        const std::size_t slash = s.find('/');
        try {
            if (slash == std::string::npos) return Rational(std::stoll(s));
            return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
        } catch (const std::exception&) {
            throw config_error(where + ": cannot parse rational '" + s + "'");
        }
    }
    throw config_error(where + ": expected an integer, [num, den], or \"p/q\"");
}

inline DatasetSpec dataset_spec_from_json(const nlohmann::json& doc) {
    expect_keys(doc, {"classes", "styles", "poses", "class_weights"}, "dataset");
    if (!doc.contains("classes")) throw config_error("dataset: missing 'classes'");
    DatasetSpec spec;
    for (const auto& cls : doc.at("classes")) {
        expect_keys(cls, {"name", "masks"}, "dataset class");
        ShapeSpec shape;
        shape.class_name = config_str(cls, "name");
        if (!cls.contains("masks") || !cls.at("masks").is_array())
            throw config_error("dataset class: 'masks' must be an array");
        for (const auto& m : cls.at("masks")) {
            if (!m.is_number_integer())
                throw config_error("dataset class: masks are 16-bit integers");
            const long long bits = m.get<long long>();
            if (bits < 0 || bits > 0xFFFF)
                throw config_error("dataset class: mask out of 16-bit range");
            shape.masks.push_back(static_cast<std::uint16_t>(bits));
        }
        spec.classes.push_back(std::move(shape));
    }
    if (doc.contains("styles")) spec.styles = doc.at("styles").get<std::vector<int>>();
    if (doc.contains("poses")) spec.poses = doc.at("poses").get<std::vector<int>>();
    if (doc.contains("class_weights"))
        spec.class_weights = doc.at("class_weights").get<std::vector<double>>();
    return spec;
}

// Small exact instances shared by the estimator-facing experiments.
inline JointTable xor_instance() {
    JointTable ac({numbered_alphabet("A", 2), numbered_alphabet("C", 2)},
                  {0.25, 0.25, 0.25, 0.25});
    return ac.extend_deterministic(numbered_alphabet("X", 2), {"A", "C"},
                                   [](const std::vector<std::size_t>& v) { return v[0] ^ v[1]; });
}

inline JointTable concat_instance() {
    JointTable ac({numbered_alphabet("A", 2), numbered_alphabet("C", 2)},
                  {0.25, 0.25, 0.25, 0.25});
    return ac.extend_deterministic(numbered_alphabet("X", 4), {"A", "C"},
                                   [](const std::vector<std::size_t>& v) { return v[0] * 2 + v[1]; });
}

// Model selector: {"kind": "xor" | "concat" | "additive" | "zoo" | "file" | "table", ...}
inline JointTable model_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw config_error("model: expected a JSON object");
    const std::string kind = config_str(doc, "kind");
    if (kind == "xor") {
        expect_keys(doc, {"kind"}, "model xor");
        return xor_instance();
    }
    if (kind == "concat") {
        expect_keys(doc, {"kind"}, "model concat");
        return concat_instance();
    }
    if (kind == "additive") {
        expect_keys(doc, {"kind", "n_a", "n_c", "lambda"}, "model additive");
        const Rational lambda =
            doc.contains("lambda") ? config_rational(doc.at("lambda"), "model additive") : Rational(1);
        return additive_joint(AdditiveModel(static_cast<int>(config_int(doc, "n_a")),
                                            static_cast<int>(config_int(doc, "n_c")), lambda));
    }
    if (kind == "zoo") {
        expect_keys(doc, {"kind", "family", "dataset"}, "model zoo");
        const ToyDataset ds = doc.contains("dataset")
                                  ? build_toy_dataset(dataset_spec_from_json(doc.at("dataset")))
                                  : default_toy_dataset();
        return apply_transform_family(ds, make_family(config_str(doc, "family")));
    }
    if (kind == "file") {
        expect_keys(doc, {"kind", "path"}, "model file");
        std::ifstream in(config_str(doc, "path"));
        if (!in) throw config_error("model file: cannot open '" + config_str(doc, "path") + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw config_error(std::string("model file: ") + e.what());
        }
        return joint_table_from_json(j);
    }
    if (kind == "table") {
        expect_keys(doc, {"kind", "joint"}, "model table");
        if (!doc.contains("joint")) throw config_error("model table: missing 'joint'");
        return joint_table_from_json(doc.at("joint"));
    }
    throw config_error("model: unknown kind '" + kind + "'");
}

inline PredictiveFamily family_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw config_error("family: expected a JSON object");
    const std::string kind = config_str(doc, "kind");
    if (kind == "full") {
        expect_keys(doc, {"kind"}, "family full");
        return PredictiveFamily::full();
    }
    if (kind == "constant") {
        expect_keys(doc, {"kind"}, "family constant");
        return PredictiveFamily::constant();
    }
    if (kind == "partition") {
        expect_keys(doc, {"kind", "blocks"}, "family partition");
        if (!doc.contains("blocks")) throw config_error("family partition: missing 'blocks'");
        std::vector<std::vector<std::string>> blocks;
        for (const auto& b : doc.at("blocks")) blocks.push_back(b.get<std::vector<std::string>>());
        return PredictiveFamily::partition(std::move(blocks));
    }
    if (kind == "linear_softmax") {
        expect_keys(doc, {"kind", "step_size", "steps"}, "family linear_softmax");
        TrainConfig train;
        train.step_size = config_num(doc, "step_size", train.step_size);
        train.steps = static_cast<int>(config_int(doc, "steps", train.steps));
        return PredictiveFamily::linear_softmax(train);
    }
    throw config_error("family: unknown kind '" + kind + "'");
}

// Training keys common to the estimate and controlled experiments.
inline TrainConfig train_from_doc(const nlohmann::json& doc, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.step_size = config_num(doc, "step_size", cfg.step_size);
    cfg.steps = static_cast<int>(config_int(doc, "steps", cfg.steps));
    cfg.lambda1 = config_num(doc, "lambda1", cfg.lambda1);
    cfg.lambda2 = config_num(doc, "lambda2", cfg.lambda2);
    cfg.bottleneck = static_cast<int>(config_int(doc, "bottleneck", cfg.bottleneck));
    cfg.seed = seed;
    const std::string mode = config_str(doc, "mode", std::string("population"));
    if (mode == "population") {
        cfg.mode = TrainConfig::Mode::population;
    } else if (mode == "sampled") {
        cfg.mode = TrainConfig::Mode::sampled;
        cfg.samples = static_cast<std::size_t>(config_int(doc, "samples", 10000));
    } else {
        throw config_error("mode must be 'population' or 'sampled'");
    }
    return cfg;
}

constexpr const char* kReserved[3] = {"experiment", "seed", "output_path"};

inline void expect_experiment_keys(const nlohmann::json& doc,
                                   std::initializer_list<const char*> specific,
                                   const std::string& name) {
    if (!doc.is_object()) throw config_error(name + ": config must be a JSON object");
    for (const auto& item : doc.items()) {
        bool known = false;
        for (const char* k : kReserved)
            if (item.key() == k) known = true;
        for (const char* k : specific)
            if (item.key() == k) known = true;
        if (!known) throw config_error(name + ": unknown key '" + item.key() + "'");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// experiment runners

inline RunResult run_additive(const nlohmann::json& doc) {
    detail::expect_experiment_keys(doc, {"n_a", "n_c", "lambda"}, "additive");
    const int n_a = static_cast<int>(detail::config_int(doc, "n_a"));
    const int n_c = static_cast<int>(detail::config_int(doc, "n_c"));
    const Rational lambda =
        doc.contains("lambda") ? detail::config_rational(doc.at("lambda"), "additive") : Rational(1);
    const AdditiveModel model(n_a, n_c, lambda);

    const double exact = additive_synergy_exact(model);
    const bool bound_applies = n_c >= 2 && n_a >= n_c;
    const double bound = bound_applies ? additive_lower_bound(n_a, n_c) : 0.0;

    ReportRow row;
    row.integer("n_a", n_a);
    row.integer("n_c", n_c);
    row.integer("lambda_num", lambda.num);
    row.integer("lambda_den", lambda.den);
    row.num("h_x", additive_h_x(model), true);
    row.num("synergy_exact", exact, true);
    row.num("bound", bound, true);
    row.boolean("bound_applies", bound_applies);
    // the closed form lower-bounds the balanced (lambda = 1) synergy only
    row.verdict("bound_le_exact",
                !bound_applies || lambda != Rational(1) || bound <= exact + kIdentityTol);

    RunResult out;
    out.rows.push_back(std::move(row));
    out.plot_x = "n_a";
    out.plot_y = "synergy_exact";
    return out;
}

inline RunResult run_sweep_lambda(const nlohmann::json& doc) {
    detail::expect_experiment_keys(doc, {"n_a", "n_c", "grid"}, "sweep-lambda");
    const int n_a = static_cast<int>(detail::config_int(doc, "n_a", 3));
    const int n_c = static_cast<int>(detail::config_int(doc, "n_c", 3));
    if (!doc.contains("grid") || !doc.at("grid").is_array())
        throw config_error("sweep-lambda: 'grid' must be an array of rationals");
    std::vector<Rational> grid;
    for (const auto& v : doc.at("grid")) grid.push_back(detail::config_rational(v, "sweep-lambda"));

    const auto sweep = lambda_sweep(n_a, n_c, grid);
    double best = 0.0;
    for (const auto& [l, s] : sweep) best = std::max(best, s);

    RunResult out;
    for (const auto& [l, s] : sweep) {
        const bool is_argmax = s >= best - kIdentityTol;
        ReportRow row;
        row.integer("n_a", n_a);
        row.integer("n_c", n_c);
        row.integer("lambda_num", l.num);
        row.integer("lambda_den", l.den);
        row.num("lambda", static_cast<double>(l.num) / static_cast<double>(l.den));
        row.num("synergy", s, true);
        row.boolean("is_argmax", is_argmax);
        // balanced mixing must sit in the argmax set
        row.verdict("balanced_argmax", l != Rational(1) || is_argmax);
        out.rows.push_back(std::move(row));
    }
    out.plot_x = "lambda";
    out.plot_y = "synergy";
    return out;
}

inline RunResult run_sweep_na(const nlohmann::json& doc) {
    detail::expect_experiment_keys(doc, {"n_c", "n_a_from", "n_a_to"}, "sweep-na");
    const int n_c = static_cast<int>(detail::config_int(doc, "n_c"));
    const int from = static_cast<int>(detail::config_int(doc, "n_a_from", n_c));
    const int to = static_cast<int>(detail::config_int(doc, "n_a_to", 24));
    if (from > to) throw config_error("sweep-na: n_a_from exceeds n_a_to");
    std::vector<int> values;
    for (int n_a = from; n_a <= to; ++n_a) values.push_back(n_a);

    const auto sweep = action_space_sweep(n_c, values);
    RunResult out;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const auto& r = sweep[i];
        ReportRow row;
        row.integer("n_a", r.n_a);
        row.integer("n_c", n_c);
        row.num("synergy_exact", r.exact, true);
        row.num("bound", r.bound, true);
        row.verdict("bound_le_exact", r.bound <= r.exact + kIdentityTol);
        row.verdict("bound_increased", i == 0 || r.bound > sweep[i - 1].bound);
        const bool tight = std::abs(r.bound - r.exact) <= kIdentityTol;
        row.boolean("tight", tight);
        row.verdict("tight_when_binary", n_c != 2 || tight);
        out.rows.push_back(std::move(row));
    }
    out.plot_x = "n_a";
    out.plot_y = "bound";
    return out;
}

inline RunResult run_zoo(const nlohmann::json& doc) {
    detail::expect_experiment_keys(doc, {"family", "dataset"}, "zoo");
    const ToyDataset ds = doc.contains("dataset")
                              ? build_toy_dataset(detail::dataset_spec_from_json(doc.at("dataset")))
                              : default_toy_dataset();
    std::vector<std::string> families;
    const std::string requested = detail::config_str(doc, "family", std::string("all"));
    if (requested == "all")
        families = all_family_names();
    else
        families.push_back(requested);

    RunResult out;
    for (const auto& name : families) {
        const TransformFamily family = make_family(name);
        const JointTable joint = apply_transform_family(ds, family);
        const SynergyReport r = synergy_report(joint);

        bool pass = r.h_a >= -kClampTol && r.h_a_given_x >= -kClampTol &&
                    r.h_a_given_xc <= r.h_a_given_x + kIdentityTol && r.synergy >= -kClampTol;
        if (name == "direct_concat") pass = pass && r.synergy <= 1e-12;

        ReportRow row;
        row.text("family", name);
        row.integer("n_actions", static_cast<long long>(family.action_space.size()));
        row.num("h_a", r.h_a, true);
        row.num("h_a_given_x", r.h_a_given_x, true);
        row.num("h_a_given_xc", r.h_a_given_xc, true);
        row.num("synergy", r.synergy, true);
        row.boolean("lossy", r.lossy);
        row.boolean("class_relevant", r.class_relevant);
        row.verdict("pass", pass);
        out.rows.push_back(std::move(row));
    }
    out.plot_x = "n_actions";
    out.plot_y = "synergy";
    return out;
}

inline RunResult run_explain_away(const nlohmann::json& doc, std::uint64_t seed) {
    detail::expect_experiment_keys(doc, {"models", "concentration"}, "explain-away");
    const long long models = detail::config_int(doc, "models", 1000);
    if (models < 1) throw config_error("explain-away: 'models' must be positive");
    const double concentration = detail::config_num(doc, "concentration", 1.0);

    RunResult out;
    for (long long i = 0; i < models; ++i) {
        const ColliderModel m = sample_random_model(ColliderSizes{}, seed + static_cast<std::uint64_t>(i),
                                                    concentration);
        const ExplainAwayReport r = check_explaining_away(build_collider_joint(m));
        ReportRow row;
        row.integer("model_index", i);
        row.num("i_ac", r.i_ac, true);
        row.num("i_ac_given_x", r.i_ac_given_x, true);
        // roots are independent by construction; conditioning is what couples them
        row.verdict("independent", r.i_ac <= 1e-10);
        row.boolean("synergetic", r.i_ac_given_x > 1e-9);
        out.rows.push_back(std::move(row));
    }
    out.plot_x = "model_index";
    out.plot_y = "i_ac_given_x";
    return out;
}

inline RunResult run_encoders(const nlohmann::json& doc) {
    detail::expect_experiment_keys(doc, {"model", "z"}, "encoders");
    const JointTable joint =
        doc.contains("model")
            ? detail::model_from_json(doc.at("model"))
            : additive_joint(AdditiveModel(4, 3, Rational(1)));
    const long long nz = detail::config_int(doc, "z", 3);
    if (nz < 1) throw config_error("encoders: 'z' must be positive");

    RunResult out;
    EncoderEnumerator stream(joint.alphabet("X"), numbered_alphabet("Z", static_cast<std::size_t>(nz)));
    long long index = 0;
    while (auto enc = stream.next()) {
        const JointTable ext = apply_encoder(joint, *enc);
        const ClassFeatureGain g = class_feature_gain(ext, identity_feature_map(ext.alphabet("C")));
        const double cmi = conditional_mutual_information(ext, {"A"}, {"C"}, {"Z"});
        ReportRow row;
        row.integer("encoder_index", index++);
        row.num("i_a_z", g.i_a_z, true);
        row.num("i_a_ztilde", g.i_a_ztilde, true);
        row.num("gain", g.gain, true);
        row.num("joint_cmi", cmi, true);
        row.verdict("identity_ok", std::abs(g.gain - cmi) <= kIdentityTol);
        row.verdict("strict_ok", cmi <= 1e-9 || g.i_a_ztilde > g.i_a_z);
        out.rows.push_back(std::move(row));
    }
    out.plot_x = "encoder_index";
    out.plot_y = "gain";
    return out;
}

inline RunResult run_bound_check(const nlohmann::json& doc) {
    detail::expect_experiment_keys(doc, {"model", "z"}, "bound-check");
    const JointTable joint =
        doc.contains("model") ? detail::model_from_json(doc.at("model")) : detail::xor_instance();
    const long long nz = detail::config_int(doc, "z", 2);
    if (nz < 1) throw config_error("bound-check: 'z' must be positive");

    RunResult out;
    EncoderEnumerator stream(joint.alphabet("X"), numbered_alphabet("Z", static_cast<std::size_t>(nz)));
    long long index = 0;
    while (auto enc = stream.next()) {
        const JointTable ext = apply_encoder(joint, *enc);
        const BoundReport r = generalization_bound_report(ext);
        ReportRow row;
        row.integer("encoder_index", index++);
        row.num("i_z_a", r.i_z_a, true);
        row.num("i_z_c", r.i_z_c, true);
        row.num("i_x_a_given_c", r.i_x_a_given_c, true);
        row.num("stated_rhs", r.stated_rhs, true);
        row.num("proof_rhs", r.proof_rhs, true);
        row.verdict("proof_holds", r.proof_holds);
        // the printed form is reported as-is; its failures are findings, not bugs
        row.boolean("stated_holds", r.stated_holds);
        out.rows.push_back(std::move(row));
    }
    out.plot_x = "encoder_index";
    out.plot_y = "i_z_a";
    return out;
}

inline RunResult run_vinfo(const nlohmann::json& doc) {
    detail::expect_experiment_keys(doc, {"model", "family", "target", "side"}, "vinfo");
    const JointTable joint =
        doc.contains("model") ? detail::model_from_json(doc.at("model")) : detail::xor_instance();
    const PredictiveFamily family = doc.contains("family")
                                        ? detail::family_from_json(doc.at("family"))
                                        : PredictiveFamily::full();
    const std::string target = detail::config_str(doc, "target", std::string("A"));
    std::vector<std::string> side = {"X"};
    if (doc.contains("side")) side = doc.at("side").get<std::vector<std::string>>();

    const double h_v = v_conditional_entropy(family, joint, target, side);
    const double h = conditional_entropy(joint, {target}, side);
    const double i_v = v_conditional_information(family, joint, "C", target, side);
    const double i = conditional_mutual_information(joint, {target}, {"C"}, side);
    const double slack =
        family.kind == PredictiveFamily::Kind::linear_softmax ? kVFitSlack + 1e-9 : 1e-9;

    static const char* kKindNames[] = {"full", "constant", "partition", "linear_softmax"};
    std::string sides;
    for (const auto& s : side) sides += (sides.empty() ? "" : "+") + s;

    ReportRow row;
    row.text("family", kKindNames[static_cast<int>(family.kind)]);
    row.text("target", target);
    row.text("side", sides);
    row.num("h_v", h_v, true);
    row.num("h_shannon", h, true);
    row.num("i_v", i_v, true);
    row.num("i_shannon", i, true);
    row.verdict("dominates_shannon", h_v >= h - slack);

    RunResult out;
    out.rows.push_back(std::move(row));
    out.plot_x = "h_shannon";
    out.plot_y = "h_v";
    return out;
}

inline RunResult run_estimate(const nlohmann::json& doc, std::uint64_t seed) {
    detail::expect_experiment_keys(doc, {"model", "step_size", "steps", "mode", "samples"},
                                   "estimate");
    const JointTable joint =
        doc.contains("model") ? detail::model_from_json(doc.at("model")) : detail::xor_instance();
    const TrainConfig cfg = detail::train_from_doc(doc, seed);

    const VariationalEstimate v = estimate_synergy_variational(joint, cfg);
    const double exact = conditional_mutual_information(joint, {"A"}, {"C"}, {"X"});
    const bool population = cfg.mode == TrainConfig::Mode::population;

    ReportRow row;
    row.text("mode", population ? "population" : "sampled");
    row.num("i_hat", v.i_hat, true);
    row.num("ce_without", v.ce_without, true);
    row.num("ce_with", v.ce_with, true);
    row.num("exact", exact, true);
    row.num("abs_err", std::abs(v.i_hat - exact), true);
    // the 2e-3 guarantee only covers exact-population training
    row.boolean("matches_exact", std::abs(v.i_hat - exact) <= 2e-3, population);

    RunResult out;
    out.rows.push_back(std::move(row));
    out.plot_x = "exact";
    out.plot_y = "i_hat";
    return out;
}

inline RunResult run_controlled(const nlohmann::json& doc, std::uint64_t seed) {
    detail::expect_experiment_keys(doc,
                                   {"family", "variant", "dataset", "step_size", "steps", "lambda1",
                                    "lambda2", "bottleneck", "mode", "samples"},
                                   "controlled");
    const ToyDataset ds = doc.contains("dataset")
                              ? build_toy_dataset(detail::dataset_spec_from_json(doc.at("dataset")))
                              : default_toy_dataset();
    const TransformFamily family = make_family(detail::config_str(doc, "family", std::string("rotation4")));
    const Variant variant = parse_variant(detail::config_str(doc, "variant", std::string("baseline")));
    const TrainConfig cfg = detail::train_from_doc(doc, seed);

    const ControlledResult r = controlled_experiment(ds, family, variant, cfg);
    static const char* kVariantNames[] = {"baseline", "plus_cls", "minus_cls"};

    RunResult out;
    for (const CurvePoint& pt : r.curve) {
        ReportRow row;
        row.text("variant", kVariantNames[static_cast<int>(variant)]);
        row.integer("step", pt.step);
        row.num("loss_equiv", pt.loss_equiv, true);
        row.num("loss_cls", pt.loss_cls, true);
        row.num("acc_equiv", pt.acc_equiv);
        row.num("acc_cls", pt.acc_cls);
        out.rows.push_back(std::move(row));
    }
    out.plot_x = "step";
    out.plot_y = "acc_equiv";
    return out;
}

// ---------------------------------------------------------------------------
// dispatch, emitters, verdict scan

inline ExperimentConfig parse_experiment_config(const nlohmann::json& doc,
                                                const std::string& experiment) {
    if (!doc.is_object()) throw config_error("config: expected a JSON object");
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    cfg.parameters = doc;
    if (doc.contains("experiment")) {
        const auto& v = doc.at("experiment");
        if (!v.is_string()) throw config_error("config: 'experiment' must be a string");
        if (v.get<std::string>() != experiment)
            throw config_error("config: experiment '" + v.get<std::string>() +
                               "' does not match the requested '" + experiment + "'");
    }
    if (doc.contains("seed")) {
        const auto& v = doc.at("seed");
        if (v.is_number_unsigned() || v.is_number_integer()) {
            cfg.seed = v.get<std::uint64_t>();
        } else if (v.is_string()) {
            try {
                cfg.seed = std::stoull(v.get<std::string>(), nullptr, 0);
            } catch (const std::exception&) {
                throw config_error("config: cannot parse seed '" + v.get<std::string>() + "'");
            }
        } else {
            throw config_error("config: 'seed' must be an integer or string");
        }
    }
    if (doc.contains("output_path")) cfg.output_path = detail::config_str(doc, "output_path");
    return cfg;
}

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "additive", "sweep-lambda", "sweep-na",    "zoo",      "explain-away",
        "encoders", "bound-check",  "vinfo",       "estimate", "controlled"};
    return names;
}

inline RunResult run_experiment(const ExperimentConfig& cfg) {
    const nlohmann::json& doc = cfg.parameters;
    if (cfg.experiment == "additive") return run_additive(doc);
    if (cfg.experiment == "sweep-lambda") return run_sweep_lambda(doc);
    if (cfg.experiment == "sweep-na") return run_sweep_na(doc);
    if (cfg.experiment == "zoo") return run_zoo(doc);
    if (cfg.experiment == "explain-away") return run_explain_away(doc, cfg.seed);
    if (cfg.experiment == "encoders") return run_encoders(doc);
    if (cfg.experiment == "bound-check") return run_bound_check(doc);
    if (cfg.experiment == "vinfo") return run_vinfo(doc);
    if (cfg.experiment == "estimate") return run_estimate(doc, cfg.seed);
    if (cfg.experiment == "controlled") return run_controlled(doc, cfg.seed);
    throw usage_error("unknown experiment '" + cfg.experiment + "'");
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace detail {

inline double display_value(const ReportValue& v, bool bits) {
    if (v.kind == ReportValue::Kind::integer) return static_cast<double>(v.inum);
    if (v.kind != ReportValue::Kind::number)
        throw usage_error("plotdata: column is not numeric");
    return bits && v.nats ? v.num / std::log(2.0) : v.num;
}

inline void check_schema(const std::vector<ReportRow>& rows) {
    if (rows.empty()) throw usage_error("no rows to emit");
    for (const auto& row : rows) {
        if (row.fields.size() != rows.front().fields.size())
            throw usage_error("rows disagree on columns");
        for (std::size_t i = 0; i < row.fields.size(); ++i)
            if (row.fields[i].first != rows.front().fields[i].first)
                throw usage_error("rows disagree on columns");
    }
}

}  // namespace detail

inline void emit_csv(const std::vector<ReportRow>& rows, std::ostream& os, bool bits = false) {
    detail::check_schema(rows);
    for (std::size_t i = 0; i < rows.front().fields.size(); ++i)
        os << (i ? "," : "") << rows.front().fields[i].first;
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.fields.size(); ++i) {
            const ReportValue& v = row.fields[i].second;
            if (i) os << ",";
            switch (v.kind) {
                case ReportValue::Kind::number:
                    os << format_number(detail::display_value(v, bits));
                    break;
                case ReportValue::Kind::integer: os << v.inum; break;
                case ReportValue::Kind::boolean: os << (v.flag ? "true" : "false"); break;
                case ReportValue::Kind::text: os << v.text; break;
            }
        }
        os << "\n";
    }
}

inline void emit_json(const std::vector<ReportRow>& rows, std::ostream& os, bool bits = false) {
    detail::check_schema(rows);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json obj;
        for (const auto& [name, v] : row.fields) {
            switch (v.kind) {
                case ReportValue::Kind::number:
                    // parse the printed form back so csv and json agree exactly
                    obj[name] = std::stod(format_number(detail::display_value(v, bits)));
                    break;
                case ReportValue::Kind::integer: obj[name] = v.inum; break;
                case ReportValue::Kind::boolean: obj[name] = v.flag; break;
                case ReportValue::Kind::text: obj[name] = v.text; break;
            }
        }
        arr.push_back(std::move(obj));
    }
    os << arr.dump(2) << "\n";
}

inline void emit_plotdata(const RunResult& result, std::ostream& os, bool bits = false) {
    detail::check_schema(result.rows);
    if (result.plot_x.empty() || result.plot_y.empty())
        throw usage_error("plotdata: experiment defines no plot columns");
    os << "# " << result.plot_x << " " << result.plot_y << "\n";
    for (const auto& row : result.rows) {
        const ReportValue* x = row.find(result.plot_x);
        const ReportValue* y = row.find(result.plot_y);
        if (!x || !y) throw usage_error("plotdata: plot column missing from row");
        os << format_number(detail::display_value(*x, bits)) << " "
           << format_number(detail::display_value(*y, bits)) << "\n";
    }
}

inline void emit_outputs(const RunResult& result, const std::string& format, std::ostream& os,
                         bool bits = false) {
    if (format == "csv")
        emit_csv(result.rows, os, bits);
    else if (format == "json")
        emit_json(result.rows, os, bits);
    else if (format == "plotdata")
        emit_plotdata(result, os, bits);
    else
        throw usage_error("unknown output format '" + format + "'");
}

struct VerdictFailure {
    std::size_t row = 0;
    std::string column;
};

inline std::vector<VerdictFailure> failed_verdicts(const std::vector<ReportRow>& rows) {
    std::vector<VerdictFailure> out;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (const auto& [name, v] : rows[i].fields)
            if (v.verdict && v.kind == ReportValue::Kind::boolean && !v.flag)
                out.push_back({i, name});
    return out;
}

}  // namespace synergy
