/// @file io_util.hpp
/// @brief Small text/number helpers shared by the CSV and JSON writers.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace chainsift {

/// Shortest decimal form that parses back to the same double
/// (std::to_chars general form). Keeps every emitted artifact
/// byte-stable and round-trippable.
std::string fmt_double(double v);

std::string_view trim(std::string_view s);

/// FNV-1a over a whole file; used for the manifest's config hash.
std::uint64_t hash_bytes(std::string_view bytes);

std::string to_hex(std::uint64_t v);

/// Read a whole file or throw InputError.
std::string read_file(const std::string& path);

/// Truncate-and-write; throws PipelineError on failure.
void write_file(const std::string& path, std::string_view content);

}  // namespace chainsift
