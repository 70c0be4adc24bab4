#pragma once

// Flat binary and CSV serialization of fields.
//
// Binary layout (little-endian):
//   magic "FCF1" | u32 dim | u64 shape[dim] | f64 h | f64 origin[dim]
//   | u64 run_count | (u64 start, u64 len) x run_count   (interior runs)
//   | f64 payload (interior cell values, run order)

#include <string>

#include "flatcore/grid.hpp"

namespace flatcore::grid {

void write_field_binary(const std::string& path, const Grid& g, const Field& u);

struct LoadedField {
    int dim = 0;
    std::array<std::int64_t, kMaxDim> shape{};
    double h = 0.0;
    Point origin{};
    std::vector<std::uint8_t> mask;
    std::vector<double> values; // full array, exterior cells 0
};

LoadedField read_field_binary(const std::string& path);

/// One row per interior cell: coordinates then value.
void write_field_csv(const std::string& path, const Grid& g, const Field& u);

/// temp-file + rename text writer used by all CSV/JSON outputs.
void write_text_atomic(const std::string& path, const std::string& content);

} // namespace flatcore::grid
