#pragma once

#include <string>
#include <variant>

#include "cmm/recovery.hpp"
#include "cmm/sketch.hpp"

namespace cmm {

/// Binary sketch container, magic "CMMS", version 1. Fixed-width
/// little-endian integers and IEEE-754 doubles; coefficient payload
/// round-trips bitwise and hash families and codes are rebuilt from the
/// recorded seeds.
///
/// Layout:
///   magic[4] version:u16 mode:u8 sign_independence:u8
///   n1:u64 n2:u64 n3:u64 b:u32 d:u32 seed:u64
///   recoverable only: ell_row:u32 ell_col:u32 delta_num:u32 delta_den:u32
///                     row_code_seed:u64 col_code_seed:u64
///   payload: per repetition, the unmasked vector then (recoverable only)
///   the ell_row row-masked and ell_col column-masked vectors, each b
///   doubles.
inline constexpr char kSketchMagic[4] = {'C', 'M', 'M', 'S'};
inline constexpr std::uint16_t kSketchFormatVersion = 1;

using AnySketch = std::variant<SketchSet, RecoverableSketch>;

void store_sketch(const std::string& path, const SketchSet& sk);
void store_sketch(const std::string& path, const RecoverableSketch& sk);
void store_sketch(const std::string& path, const AnySketch& sk);

AnySketch load_sketch(const std::string& path);

}  // namespace cmm
