#pragma once

#include <string>

#include "fedmr/model.hpp"

namespace fedmr {

// Flat binary model container, little-endian:
//   magic "FEDMRCK1" | u32 arch_len | arch bytes | u32 layer_count
//   per layer: u8 kind | u32 stride | u32 pool | u32 param_count
//              per param: u32 ndim | u64 dims[ndim] | f64 payload
void save_checkpoint(const LayeredModel& model, const std::string& path);
LayeredModel load_checkpoint(const std::string& path);

} // namespace fedmr
