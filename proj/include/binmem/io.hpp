#pragma once

#include <filesystem>
#include "json.hpp"
#include <ostream>
#include <string>

#include "binmem/processes.hpp"

namespace binmem {

/// "%.17g"; round-trips every finite double.
std::string format_double(double value);

/// Columns step,t,xi,W,Y,S; step 0 carries xi = 0, and S is left blank when
/// the path has no price attached.
void write_path_csv(std::ostream& os, const DiscretePath& path);

/// Pretty-printed JSON with 17-significant-digit floats and null for
/// non-finite numbers. Object keys are emitted in sorted order.
void write_json(std::ostream& os, const nlohmann::json& value);
std::string to_json_text(const nlohmann::json& value);

/// Writes `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace binmem
