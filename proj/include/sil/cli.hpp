#pragma once

#include "sil/io.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sil {

/// Invalid command-line configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SuiteConfig {
    std::string suite;
    double p = 2.0;
    /// Unset selects the suite's own grid width.
    std::optional<double> h;
    /// Unset selects the suite's own tolerance.
    std::optional<double> tol;
    std::uint64_t seed = 1;
    std::string spec;
    std::string report_path;

    /// Throws ConfigError on an unknown suite or a non-positive h or tol.
    void validate() const;
};

const std::vector<std::string>& suite_names();

struct Check {
    enum class Relation { AtMost, AtLeast, Within };

    std::string name;
    std::string tag;
    double measured = 0.0;
    double threshold = 0.0;
    Relation relation = Relation::AtMost;
    /// Reference value for Relation::Within.
    double expected = 0.0;

    [[nodiscard]] bool pass() const;
};

struct SuiteResult {
    std::string suite;
    std::vector<Check> checks;
    Json details = Json::object();

    [[nodiscard]] bool passed() const;
};

SuiteResult run_suite(const SuiteConfig& config);

/// Deterministic report: same config and seed give byte-identical output.
Json report_json(const SuiteConfig& config, const SuiteResult& result);

/// Human summary, one line per check.
void print_summary(std::ostream& out, const SuiteResult& result);

int cmd_verify(const SuiteConfig& config, std::ostream& out);

struct ReconstructConfig {
    std::string spec;
    std::string domain;
    double p = 2.0;
    std::optional<double> h;
    double tol = 1e-6;
    std::string out_dir;
};

/// Writes g_hat.csv, xi_hat.csv and fit.json; exit 1 if the zero set exceeds 1% of the cells.
int cmd_reconstruct(const ReconstructConfig& config, std::ostream& out);

struct CongruenceConfig {
    std::string domain1;
    std::string domain2;
    std::string motion;
    double tol = 0.0;
    std::optional<double> h;
};

/// Exit 0 iff the motion carries domain2 onto domain1 within tol.
int cmd_congruence(const CongruenceConfig& config, std::ostream& out);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace sil
