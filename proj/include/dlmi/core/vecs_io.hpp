#pragma once

// Readers and writers for the .fvecs / .ivecs formats distributed with the
// ANN-benchmarks SIFT data: each record is a little-endian int32 dimension d
// followed by d little-endian 32-bit values.

#include "dlmi/core/types.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace dlmi {

/// Ids are assigned sequentially from 0. An empty file yields an empty
/// dataset with undefined (0) dimension. Malformed input throws ParseError.
Dataset read_fvecs(const std::filesystem::path& path);
Dataset parse_fvecs(std::span<const std::byte> bytes);

void write_fvecs(const std::filesystem::path& path, const Dataset& dataset);
std::vector<std::byte> serialize_fvecs(const Dataset& dataset);

/// Each record becomes one ground-truth list; k is the record dimension.
GroundTruth read_ivecs(const std::filesystem::path& path);
GroundTruth parse_ivecs(std::span<const std::byte> bytes);

void write_ivecs(const std::filesystem::path& path, const GroundTruth& truth);
std::vector<std::byte> serialize_ivecs(const GroundTruth& truth);

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace dlmi
