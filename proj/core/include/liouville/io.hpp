#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "liouville/field_sampler.hpp"
#include "liouville/kernels.hpp"

namespace liouville {

/// Shortest round-trip decimal form of a double; locale independent, so
/// artifact files are byte-stable across runs.
std::string format_double(double value);

/// Minimal CSV writer with deterministic number formatting.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path,
              const std::vector<std::string>& header);

    void row(const std::vector<double>& values);
    void row_mixed(const std::vector<std::string>& values);

private:
    std::ofstream out_;
    std::size_t columns_ = 0;
};

/// Exports a kernel lookup table as CSV with columns (r, value).
void export_kernel_table(const RadialTable& table,
                         const std::filesystem::path& path);

/// Field snapshot: one JSON header line (grid, schedule, mass, seed, level)
/// followed by the row-major little-endian doubles of X_level.
void save_field_snapshot(const FieldStack& stack, int level,
                         const std::filesystem::path& path);

/// Loads a snapshot into a single-level stack.
FieldStack load_field_snapshot(const std::filesystem::path& path);

/// One row of the results summary emitted by the exponent experiments.
struct ResultRecord {
    std::string experiment;
    double gamma = 0.0;
    int level = 0;
    double q_or_p = 0.0;
    double slope = 0.0;
    double stderr_of_slope = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Serializes result records as a JSON array, stable field order.
void write_results_json(const std::vector<ResultRecord>& records,
                        const std::filesystem::path& path);

}  // namespace liouville
