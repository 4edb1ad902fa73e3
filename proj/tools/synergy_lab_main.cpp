#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "synergy/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"synergy-lab: exact information accounting for equivariance experiments"};

    std::string experiment;
    std::string config_path;
    std::string format = "csv";
    std::string out_path;
    std::string seed_text;
    bool bits = false;

    app.add_option("experiment", experiment, "experiment to run")
        ->required()
        ->check(CLI::IsMember(synergy::experiment_names()));
    app.add_option("--config", config_path, "path to a JSON config")->required();
    app.add_option("--format", format, "output format")
        ->check(CLI::IsMember(std::vector<std::string>{"csv", "json", "plotdata"}));
    app.add_option("--out", out_path, "output file, overrides the config's output_path");
    app.add_option("--seed", seed_text, "seed override, decimal or 0x-prefixed hex");
    app.add_flag("--bits", bits, "print information quantities in bits instead of nats");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // bad argv is a usage failure
    }

    try {
        std::ifstream in(config_path);
        if (!in) throw synergy::config_error("cannot open config '" + config_path + "'");
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw synergy::config_error(std::string("config parse: ") + e.what());
        }

        synergy::ExperimentConfig cfg = synergy::parse_experiment_config(doc, experiment);
        if (!seed_text.empty()) {
            try {
                cfg.seed = std::stoull(seed_text, nullptr, 0);
            } catch (const std::exception&) {
                throw synergy::usage_error("cannot parse --seed '" + seed_text + "'");
            }
        }
        if (!out_path.empty()) cfg.output_path = out_path;

        const synergy::RunResult result = synergy::run_experiment(cfg);

        if (cfg.output_path.empty()) {
            synergy::emit_outputs(result, format, std::cout, bits);
        } else {
            std::ofstream os(cfg.output_path);
            if (!os) throw synergy::resource_error("cannot open '" + cfg.output_path + "' for writing");
            synergy::emit_outputs(result, format, os, bits);
            os.flush();
            if (!os) throw synergy::resource_error("write failed for '" + cfg.output_path + "'");
        }

        const auto failures = synergy::failed_verdicts(result.rows);
        if (!failures.empty()) {
            for (const auto& f : failures)
                std::cerr << "invariant failed: row " << f.row << ", column " << f.column << "\n";
            return 2;
        }
        return 0;
    } catch (const synergy::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const synergy::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const synergy::usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const synergy::resource_error& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
