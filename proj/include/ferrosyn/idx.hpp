#pragma once

// MNIST IDX containers: big-endian u32 header fields, magic 0x00000803 for
// 3-D unsigned-byte image tensors and 0x00000801 for 1-D label vectors.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ferrosyn::io {

inline constexpr std::uint32_t kIdxImagesMagic = 2051;
inline constexpr std::uint32_t kIdxLabelsMagic = 2049;

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 28;
  std::size_t cols = 28;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major

  std::span<const std::uint8_t> image(std::size_t i) const {
    return {pixels.data() + i * rows * cols, rows * cols};
  }
  bool operator==(const IdxImages&) const = default;
};

struct IdxLabels {
  std::size_t count = 0;
  std::vector<std::uint8_t> labels;
  bool operator==(const IdxLabels&) const = default;
};

/// Parses an in-memory IDX image file. Throws BadMagic, Truncated (with the
/// byte offset where data ran out) or DimensionMismatch when the image is
/// not rows x cols = expected_rows x expected_cols (pass 0 to accept any).
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes, std::size_t expected_rows = 28,
                           std::size_t expected_cols = 28);
IdxLabels parse_idx_labels(std::span<const std::uint8_t> bytes);

IdxImages load_idx_images(const std::filesystem::path& path, std::size_t expected_rows = 28,
                          std::size_t expected_cols = 28);
IdxLabels load_idx_labels(const std::filesystem::path& path);

/// Throws DimensionMismatch when the two files disagree on the item count.
void check_paired(const IdxImages& images, const IdxLabels& labels);

std::vector<std::uint8_t> serialize_idx(const IdxImages& images);
std::vector<std::uint8_t> serialize_idx(const IdxLabels& labels);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace ferrosyn::io
