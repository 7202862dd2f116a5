#pragma once

// Versioned binary index container, little-endian:
//   magic "DLMIIDX\0", u32 version, header, vector table, node table
//   (preorder: pos, kind, model), bucket table, u32 crc32 of all prior bytes.

#include "dlmi/index/index.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace dlmi {

inline constexpr std::uint32_t kIndexFormatVersion = 1;

/// Load failure; `field()` names the part of the file that was rejected.
class FormatError : public std::runtime_error {
  public:
    FormatError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

std::vector<std::uint8_t> serialize_index(const Index& index);
/// Checks magic, version and checksum before parsing anything else; the
/// parsed index must pass check_consistency. Throws FormatError.
Index deserialize_index(std::span<const std::uint8_t> bytes);

void save_index(const Index& index, const std::filesystem::path& path);
Index load_index(const std::filesystem::path& path);

}  // namespace dlmi
