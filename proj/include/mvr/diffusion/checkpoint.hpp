#pragma once

// Binary checkpoint, all integers and doubles little-endian:
//
//   magic   "MVRCKPT\0"                      8 bytes
//   version u32                              currently 1
//   schedule: steps i32, beta_start f64, beta_end f64
//   config:   features, cond_dim, d_model, heads, levels   i32 each
//   layout:   interaction, latency, fluency                i32 each
//   sequence scaler: n u32, n mean f64, n scale f64
//   condition scaler: same encoding
//   optimizer step i64
//   tensor count u32, then per tensor:
//     name length u32, name bytes, rows u32, cols u32,
//     value, first moment, second moment (rows*cols f64 each, row-major)

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "mvr/diffusion/model.hpp"

namespace mvr::diffusion {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const PreferenceModel& model);
/// Throws std::runtime_error on a truncated or foreign file, and
/// std::invalid_argument when tensors disagree with the stored configuration.
PreferenceModel read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const PreferenceModel& model);
PreferenceModel load_checkpoint(const std::filesystem::path& path);

}  // namespace mvr::diffusion
