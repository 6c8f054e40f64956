#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace patrol::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInvalid = 1;
inline constexpr int kInfeasible = 2;

// Runs one subcommand (args excludes the program name). Every command that
// writes files also writes a manifest next to its first output, or to
// --manifest.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace patrol::cli
