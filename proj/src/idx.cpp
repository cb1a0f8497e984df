#include "ferrosyn/idx.hpp"

#include <fstream>
#include <iterator>
#include <string>

#include "ferrosyn/error.hpp"

namespace ferrosyn::io {

namespace {

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    const std::uint32_t v = (std::uint32_t{bytes_[pos_]} << 24) | (std::uint32_t{bytes_[pos_ + 1]} << 16) |
                            (std::uint32_t{bytes_[pos_ + 2]} << 8) | std::uint32_t{bytes_[pos_ + 3]};
    pos_ += 4;
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::Truncated, std::string(what) + " truncated at byte offset " + std::to_string(bytes_.size()) +
                                            " (needed " + std::to_string(pos_ + n) + ")");
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes, std::size_t expected_rows,
                           std::size_t expected_cols) {
  Reader in(bytes);
  const std::uint32_t magic = in.u32("magic");
  if (magic != kIdxImagesMagic) {
    throw Error(ErrorCode::BadMagic, "expected image magic 2051, found " + std::to_string(magic));
  }
  IdxImages out;
  out.count = in.u32("image count");
  out.rows = in.u32("row count");
  out.cols = in.u32("column count");
  if ((expected_rows != 0 && out.rows != expected_rows) || (expected_cols != 0 && out.cols != expected_cols)) {
    throw Error(ErrorCode::DimensionMismatch, "images are " + std::to_string(out.rows) + "x" +
                                                  std::to_string(out.cols) + ", expected " +
                                                  std::to_string(expected_rows) + "x" + std::to_string(expected_cols));
  }
  // Guard the product against overflow before allocating.
  const std::size_t per_image = out.rows * out.cols;
  if (per_image != 0 && out.count > (bytes.size() / per_image) + 1) {
    throw Error(ErrorCode::Truncated, "header announces " + std::to_string(out.count) +
                                          " images but the payload ends at byte offset " +
                                          std::to_string(bytes.size()));
  }
  const auto payload = in.take(out.count * per_image, "pixel payload");
  out.pixels.assign(payload.begin(), payload.end());
  return out;
}

IdxLabels parse_idx_labels(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const std::uint32_t magic = in.u32("magic");
  if (magic != kIdxLabelsMagic) {
    throw Error(ErrorCode::BadMagic, "expected label magic 2049, found " + std::to_string(magic));
  }
  IdxLabels out;
  out.count = in.u32("label count");
  const auto payload = in.take(out.count, "label payload");
  out.labels.assign(payload.begin(), payload.end());
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    if (out.labels[i] > 9) {
      throw Error(ErrorCode::ParseError, "label " + std::to_string(out.labels[i]) + " at index " +
                                             std::to_string(i) + " is not a digit class");
    }
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

IdxImages load_idx_images(const std::filesystem::path& path, std::size_t expected_rows, std::size_t expected_cols) {
  const auto bytes = read_file(path);
  return parse_idx_images(bytes, expected_rows, expected_cols);
}

IdxLabels load_idx_labels(const std::filesystem::path& path) { return parse_idx_labels(read_file(path)); }

void check_paired(const IdxImages& images, const IdxLabels& labels) {
  if (images.count != labels.count) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(images.count) + " images but " +
                                                  std::to_string(labels.count) + " labels");
  }
}

std::vector<std::uint8_t> serialize_idx(const IdxImages& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  put_u32(out, kIdxImagesMagic);
  put_u32(out, static_cast<std::uint32_t>(images.count));
  put_u32(out, static_cast<std::uint32_t>(images.rows));
  put_u32(out, static_cast<std::uint32_t>(images.cols));
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx(const IdxLabels& labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.labels.size());
  put_u32(out, kIdxLabelsMagic);
  put_u32(out, static_cast<std::uint32_t>(labels.count));
  out.insert(out.end(), labels.labels.begin(), labels.labels.end());
  return out;
}

}  // namespace ferrosyn::io
