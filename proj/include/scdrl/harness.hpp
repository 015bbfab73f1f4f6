#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace scdrl {

// Config / usage problems map to exit code 2, runtime failures to 3.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    nlohmann::json raw;
    std::string command;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    bool baseline = false;

    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig parse(const nlohmann::json& j);

    // Section accessors with defaults; validated at parse time.
    const nlohmann::json& section(const char* name) const;
};

struct MetricsRow {
    std::string run_id;
    std::string metric;
    double value = 0.0;
    std::string units;
    std::uint64_t seed = 0;

    static const char* csv_header();
    std::string csv_row() const;
};

// Executes one experiment; writes CSV metrics and summary.txt under
// cfg.out_dir. Returns exit code 0; throws ConfigError (2) or
// std::runtime_error (3).
int run_experiment(const ExperimentConfig& cfg);

// Entry point shared by the CLI and the C API: maps exceptions to exit
// codes and collects the error message.
int run_experiment_catching(const ExperimentConfig& cfg, std::string& error);

}  // namespace scdrl
