#include "liouville/io.hpp"

#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace liouville {

std::string format_double(double value) {
    char buf[40];
    // %.17g round-trips every double; trim to the shortest form that does.
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
    if (!out_) throw std::runtime_error("csv: cannot open " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
        out_ << header[i] << (i + 1 < header.size() ? "," : "\n");
    }
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != columns_) throw std::invalid_argument("csv: column count");
    for (std::size_t i = 0; i < values.size(); ++i) {
        out_ << format_double(values[i]) << (i + 1 < values.size() ? "," : "\n");
    }
}

void CsvWriter::row_mixed(const std::vector<std::string>& values) {
    if (values.size() != columns_) throw std::invalid_argument("csv: column count");
    for (std::size_t i = 0; i < values.size(); ++i) {
        out_ << values[i] << (i + 1 < values.size() ? "," : "\n");
    }
}

void export_kernel_table(const RadialTable& table,
                         const std::filesystem::path& path) {
    CsvWriter csv(path, {"r", "value"});
    const auto& radii = table.radii();
    const auto& values = table.values();
    for (std::size_t i = 0; i < radii.size(); ++i) {
        csv.row({radii[i], values[i]});
    }
}

// ---------------------------------------------------------------------------
// Field snapshots.

namespace {

static_assert(sizeof(double) == 8);

bool host_is_little_endian() {
    const std::uint16_t probe = 1;
    return *reinterpret_cast<const std::uint8_t*>(&probe) == 1;
}

void byteswap_doubles(std::vector<double>& values) {
    for (double& v : values) {
        auto* bytes = reinterpret_cast<std::uint8_t*>(&v);
        for (int i = 0; i < 4; ++i) std::swap(bytes[i], bytes[7 - i]);
    }
}

}  // namespace

void save_field_snapshot(const FieldStack& stack, int level,
                         const std::filesystem::path& path) {
    const int idx = stack.index_of_level(level);
    nlohmann::json header;
    header["format"] = "liouville-field-v1";
    header["grid"] = {{"extent", stack.grid.extent},
                      {"resolution", stack.grid.resolution},
                      {"periodic", stack.grid.periodic}};
    header["schedule"] = stack.params.scale_schedule;
    header["gamma"] = stack.params.gamma;
    header["mass"] = stack.params.mass;
    header["seed"] = stack.seed;
    header["level"] = level;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("snapshot: cannot open " + path.string());
    out << header.dump() << '\n';

    std::vector<double> values = stack.partial_sums[idx].data();
    if (!host_is_little_endian()) byteswap_doubles(values);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("snapshot: short write to " + path.string());
}

FieldStack load_field_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("snapshot: cannot open " + path.string());
    std::string header_line;
    if (!std::getline(in, header_line))
        throw std::runtime_error("snapshot: missing header");
    const nlohmann::json header = nlohmann::json::parse(header_line);
    if (header.value("format", "") != "liouville-field-v1")
        throw std::runtime_error("snapshot: unknown format");

    FieldStack stack;
    stack.grid.extent = header.at("grid").at("extent").get<double>();
    stack.grid.resolution = header.at("grid").at("resolution").get<int>();
    stack.grid.periodic = header.at("grid").at("periodic").get<bool>();
    stack.params.gamma = header.at("gamma").get<double>();
    stack.params.mass = header.at("mass").get<double>();
    stack.params.scale_schedule = header.at("schedule").get<std::vector<double>>();
    stack.params.truncation = static_cast<int>(stack.params.scale_schedule.size());
    stack.seed = header.at("seed").get<std::uint64_t>();
    const int level = header.at("level").get<int>();
    stack.params.validate();
    stack.grid.validate();

    Grid2D values(stack.grid.resolution);
    in.read(reinterpret_cast<char*>(values.data().data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != values.size() * sizeof(double))
        throw std::runtime_error("snapshot: truncated payload");
    if (!host_is_little_endian()) byteswap_doubles(values.data());

    stack.level_ids = {level};
    stack.partial_sums.push_back(std::move(values));
    return stack;
}

void write_results_json(const std::vector<ResultRecord>& records,
                        const std::filesystem::path& path) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json row;
        row["experiment"] = r.experiment;
        row["gamma"] = r.gamma;
        row["level"] = r.level;
        row["q_or_p"] = r.q_or_p;
        row["slope"] = r.slope;
        row["stderr"] = r.stderr_of_slope;
        row["expected"] = r.expected;
        row["tolerance"] = r.tolerance;
        row["pass"] = r.pass;
        out.push_back(row);
    }
    std::ofstream file(path);
    if (!file) throw std::runtime_error("results: cannot open " + path.string());
    file << out.dump(2) << '\n';
}

}  // namespace liouville
