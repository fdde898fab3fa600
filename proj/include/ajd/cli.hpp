#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ajd/types.hpp"

namespace ajd {

// Exit codes: 0 success, 2 input/validation failure, 3 numeric failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

struct RunConfig {
    std::string subcommand;  // check|simulate|transform|stationary|fclt|transience|calibrate
    std::string spec_path;
    std::string data_path;  // calibrate input CSV
    std::string outdir = ".";

    std::vector<double> x0;  // empty -> origin
    double T = 100.0;
    double dt = 1e-3;
    double delta = 0.5;
    long n = 1000;
    long paths = 1;
    long replicates = 500;
    int nbatches = 0;  // <= 0: floor(sqrt(#observations)) capped at 200
    int finest_blocks = 8;
    double horizon = 100.0;
    std::uint64_t seed = kDefaultSeed;

    std::vector<std::string> u_args;        // transform: one complex per coordinate
    std::vector<std::string> free_params;   // calibrate
    std::string h_id = "identity";          // stationary/fclt functional
    double skeleton_delta = 0.0;            // simulate: > 0 emits skeleton CSV

    double level = 100.0;  // transience escape level
    double escape_T = 50.0;
    double eps_max = 1.0;
    int eps_points = 20;
};

int run(const RunConfig& config);

// Artifacts are CSV with a "# schema=ajd.<kind>.v1" first line or JSON with a
// "schema_version" field.
struct CsvTable {
    std::string kind;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv_artifact(const std::string& path);
void write_csv_artifact(const std::string& path, const std::string& kind,
                        const std::vector<std::string>& columns,
                        const std::vector<std::vector<double>>& rows);

Complex parse_complex(const std::string& text);  // "1.5", "2i", "-0.3+0.7i"

}  // namespace ajd
