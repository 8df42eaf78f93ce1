#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "fracpath/continuation.hpp"

namespace fracpath {

/// 17-significant-digit decimal form; parses back to the identical double.
std::string format_g17(double v);

void write_branch_csv(const Branch& br, const std::filesystem::path& path);

/// Parses a branch file written by write_branch_csv. State vectors are not
/// stored in the CSV, so the returned records carry empty `u`.
Branch read_branch_csv(const std::filesystem::path& path);

struct Snapshot {
  Vec x;
  Mat u;  // one column per component, prolonged to the full mesh
};

void write_snapshot_csv(const Model& model, const Vec& u,
                        const std::filesystem::path& path);
Snapshot read_snapshot_csv(const std::filesystem::path& path);

/// FNV-1a (64 bit) over a byte string.
std::uint64_t fnv1a(std::string_view data);

}  // namespace fracpath
