#pragma once

// JSON round-trip for joint tables:
//   {"variables": [{"name": "...", "symbols": [...]}, ...],
//    "probabilities": [...]}            (row-major, last variable fastest)

#include <string>
#include <vector>

#include <json.hpp>

#include "synergy/errors.hpp"
#include "synergy/joint_table.hpp"

namespace synergy {

inline nlohmann::json to_json(const JointTable& t) {
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& v : t.vars()) vars.push_back({{"name", v.name}, {"symbols", v.symbols}});
    return nlohmann::json{{"variables", vars}, {"probabilities", t.probs()}};
}

inline JointTable joint_table_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw config_error("joint table: expected a JSON object");
    for (const auto& item : j.items())
        if (item.key() != "variables" && item.key() != "probabilities")
            throw config_error("joint table: unknown key '" + item.key() + "'");
    if (!j.contains("variables") || !j.contains("probabilities"))
        throw config_error("joint table: need 'variables' and 'probabilities'");
    std::vector<Alphabet> vars;
    for (const auto& v : j.at("variables")) {
        for (const auto& item : v.items())
            if (item.key() != "name" && item.key() != "symbols")
                throw config_error("joint table variable: unknown key '" + item.key() + "'");
        vars.push_back(Alphabet{v.at("name").get<std::string>(),
                                v.at("symbols").get<std::vector<std::string>>()});
    }
    try {
        return JointTable(std::move(vars), j.at("probabilities").get<std::vector<double>>());
    } catch (const usage_error& e) {
        throw config_error(std::string("joint table: ") + e.what());
    } catch (const numerical_error& e) {
        // a mis-normalized file is bad input, not an internal failure
        throw config_error(std::string("joint table: ") + e.what());
    }
}

}  // namespace synergy
