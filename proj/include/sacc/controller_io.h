#pragma once

// Checkpoint files for ControllerParams.
//
// Binary layout, little-endian:
//   8 bytes   magic "SACCCTRL"
//   u32       format version
//   u32 x3    input_dim, hidden_dim, seq_len
//   f64       a_lim
//   f64 x6    normalization offsets, then scales
//   u64       weight count
//   f64 ...   weights in ControllerParams::flatten() order
//
// The text form holds the same fields as "key = value" lines with
// shortest round-trip decimals, so both forms reload bit-exactly.

#include <filesystem>
#include <string>

#include "sacc/controller.h"

namespace sacc {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_binary(const ControllerParams& params);
ControllerParams decode_binary(const std::string& bytes);

std::string encode_text(const ControllerParams& params);
ControllerParams decode_text(const std::string& text);

// Picks the text form for a ".txt" extension, binary otherwise. Throws
// FormatError for malformed content, IoError for unreadable files.
void save_controller(const std::filesystem::path& path,
                     const ControllerParams& params);
ControllerParams load_controller(const std::filesystem::path& path);

}  // namespace sacc
