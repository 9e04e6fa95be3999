#pragma once

#include <filesystem>
#include <string>

#include "kppfrag/grid.hpp"

namespace kppfrag::io {

/// CSV with a header row `x,value` (1D) or `x,y,value` (2D), one row per node
/// in storage order (x fastest), every number printed with 17 significant
/// digits so that reading back reproduces the doubles exactly.
std::string format_field_csv(const ScalarField& field);
void write_field_csv(const ScalarField& field, const std::filesystem::path& path);

/// Parses the format above and reconstructs the grid from the coordinates.
/// Throws IoError on unreadable files and InvalidArgument on malformed data.
ScalarField parse_field_csv(const std::string& text);
ScalarField read_field_csv(const std::filesystem::path& path);

}  // namespace kppfrag::io
