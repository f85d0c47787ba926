#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "harnack/sde.hpp"

namespace harnack {

// Writes one little-endian float64 file per mode (layout [path][slot]) plus <base>.json.
// Returns the manifest path.
std::filesystem::path write_ensemble(const PathEnsemble& ens, const std::filesystem::path& dir,
                                     const std::string& base, std::uint64_t model_hash);

PathEnsemble read_ensemble(const std::filesystem::path& manifest);

// One row per (recorded time, mode): t, mode, mean, variance, stderr.
void write_time_summary_csv(const PathEnsemble& ens, const std::filesystem::path& file);

}  // namespace harnack
