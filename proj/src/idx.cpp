#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <vector>

#include "otafl/error.hpp"
#include "otafl/learning.hpp"

namespace otafl {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError(path + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset,
                        const std::string& path) {
  if (offset + 4 > buf.size()) {
    throw IngestionError(path + ": truncated header at offset " + std::to_string(offset));
  }
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void expect_magic(const std::vector<unsigned char>& buf, std::uint32_t magic,
                  const std::string& path) {
  const auto got = read_be32(buf, 0, path);
  if (got != magic) {
    throw IngestionError(path + ": bad magic 0x" + [&] {
      std::array<char, 9> hex{};
      std::snprintf(hex.data(), hex.size(), "%08x", got);
      return std::string(hex.data());
    }() + " at offset 0");
  }
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const auto images = read_all(images_path);
  const auto labels = read_all(labels_path);
  expect_magic(images, kImagesMagic, images_path);
  expect_magic(labels, kLabelsMagic, labels_path);

  const std::size_t count = read_be32(images, 4, images_path);
  const std::size_t rows = read_be32(images, 8, images_path);
  const std::size_t cols = read_be32(images, 12, images_path);
  const std::size_t label_count = read_be32(labels, 4, labels_path);
  if (count != label_count) {
    throw IngestionError(labels_path + ": label count " + std::to_string(label_count) +
                         " does not match image count " + std::to_string(count) +
                         " at offset 4");
  }
  const std::size_t pixels = rows * cols;
  constexpr std::size_t kImageHeader = 16;
  constexpr std::size_t kLabelHeader = 8;
  if (images.size() < kImageHeader + count * pixels) {
    throw IngestionError(images_path + ": truncated pixel data at offset " +
                         std::to_string(images.size()));
  }
  if (labels.size() < kLabelHeader + count) {
    throw IngestionError(labels_path + ": truncated label data at offset " +
                         std::to_string(labels.size()));
  }

  Dataset out;
  out.input_dim = pixels;
  out.features.resize(count * pixels);
  out.labels.resize(count);
  for (std::size_t i = 0; i < count * pixels; ++i) {
    out.features[i] = static_cast<double>(images[kImageHeader + i]) / 255.0;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const int label = labels[kLabelHeader + i];
    if (label > 9) {
      throw IngestionError(labels_path + ": label " + std::to_string(label) +
                           " outside 0-9 at offset " + std::to_string(kLabelHeader + i));
    }
    out.labels[i] = label;
  }
  return out;
}

}  // namespace otafl
