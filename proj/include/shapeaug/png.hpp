#pragma once

#include <zlib.h>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "shapeaug/dataset_io.hpp"

namespace shapeaug {

/// 8-bit RGB image, row-major.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h * 3, 0) {}

  std::uint8_t* at(std::size_t row, std::size_t col) noexcept { return pixels.data() + (row * width + col) * 3; }
  const std::uint8_t* at(std::size_t row, std::size_t col) const noexcept {
    return pixels.data() + (row * width + col) * 3;
  }
};

namespace detail {

inline void put_be32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffu));
}

inline void put_chunk(std::vector<std::byte>& out, std::string_view type, std::span<const std::byte> data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t type_at = out.size();
  for (char c : type) out.push_back(static_cast<std::byte>(c));
  out.insert(out.end(), data.begin(), data.end());
  const auto* crc_begin = reinterpret_cast<const Bytef*>(out.data() + type_at);
  const auto crc = crc32(0L, crc_begin, static_cast<uInt>(out.size() - type_at));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

inline std::vector<std::byte> encode_png(const RgbImage& img) {
  if (img.width == 0 || img.height == 0) throw std::invalid_argument("empty image");
  std::vector<std::byte> out;
  constexpr std::array<std::uint8_t, 8> kSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  for (auto b : kSignature) out.push_back(static_cast<std::byte>(b));

  std::vector<std::byte> ihdr;
  detail::put_be32(ihdr, static_cast<std::uint32_t>(img.width));
  detail::put_be32(ihdr, static_cast<std::uint32_t>(img.height));
  for (std::uint8_t b : {8, 2, 0, 0, 0}) ihdr.push_back(static_cast<std::byte>(b));  // 8-bit RGB
  detail::put_chunk(out, "IHDR", ihdr);

  // Scanlines with filter type 0.
  const std::size_t stride = img.width * 3;
  std::vector<Bytef> raw;
  raw.reserve((stride + 1) * img.height);
  for (std::size_t r = 0; r < img.height; ++r) {
    raw.push_back(0);
    raw.insert(raw.end(), img.pixels.begin() + static_cast<std::ptrdiff_t>(r * stride),
               img.pixels.begin() + static_cast<std::ptrdiff_t>((r + 1) * stride));
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<Bytef> packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), Z_BEST_SPEED) != Z_OK) {
    throw std::runtime_error("zlib compression failed");
  }
  detail::put_chunk(out, "IDAT", std::as_bytes(std::span(packed.data(), packed_size)));
  detail::put_chunk(out, "IEND", {});
  return out;
}

inline void write_png(const std::filesystem::path& path, const RgbImage& img) { write_file_bytes(path, encode_png(img)); }

}  // namespace shapeaug
