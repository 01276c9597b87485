#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace nomafl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

// Full command line without the program name, e.g. {"run", "exp.ini", "--seed", "3"}.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Raw little-endian 32-bit float vectors.
std::vector<float> read_f32_file(const std::filesystem::path& path);
void write_f32_file(const std::filesystem::path& path, const std::vector<float>& values);

}  // namespace nomafl::cli
