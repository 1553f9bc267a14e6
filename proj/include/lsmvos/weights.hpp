#pragma once

#include "lsmvos/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lsmvos {

struct WeightEntry {
    std::string name;
    Shape shape;
    std::uint64_t offset = 0; // bytes into the blob

    friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

/// Named float32 tensors packed into one contiguous blob.
///
/// On-disk layout, all integers little-endian:
///
///     "LSMW" | u32 version | u64 blob bytes | u64 FNV-1a checksum of blob
///     | u32 manifest bytes | manifest (UTF-8 JSON) | blob (LE float32)
///
/// The manifest is {"entries": [{"name", "shape", "offset"}, ...]} with
/// offsets ascending and non-overlapping.
class WeightsContainer {
public:
    static constexpr std::uint32_t kVersion = 1;

    void add(const std::string& name, const Tensor& tensor);

    bool contains(const std::string& name) const;
    Tensor get(const std::string& name) const;
    const WeightEntry& entry(const std::string& name) const;

    const std::vector<WeightEntry>& entries() const noexcept { return entries_; }
    std::span<const float> blob() const noexcept { return blob_; }
    std::uint64_t checksum() const;

    friend bool operator==(const WeightsContainer&, const WeightsContainer&) = default;

private:
    friend WeightsContainer load_weights(const std::filesystem::path& path);

    std::vector<WeightEntry> entries_;
    std::vector<float> blob_;
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

void save_weights(const WeightsContainer& weights, const std::filesystem::path& path);

/// Throws IoError naming the path on unreadable files, bad magic, version
/// mismatch, truncation, or checksum failure.
WeightsContainer load_weights(const std::filesystem::path& path);

} // namespace lsmvos
