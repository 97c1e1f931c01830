#pragma once

// Small helpers for the text formats every module emits.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace mfunc::io {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kVersion = "1.0.0";

// Round-trip decimal text: 17 significant digits, locale independent.
std::string format_double(double value, int significant = 17);

// FNV-1a, used for configuration hashes in sidecars.
std::uint64_t fnv1a(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t value);

// Writes through a temporary file and renames, so readers never see a partial file.
void write_text(const std::filesystem::path& path, std::string_view contents);
std::string read_text(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const Json& json);

}  // namespace mfunc::io
