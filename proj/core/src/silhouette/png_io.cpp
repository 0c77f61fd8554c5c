#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "hoi/common/error.h"
#include "hoi/silhouette/silhouette.h"

namespace hoi {

MaskImage loadMaskPng(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::MissingAsset, "mask not found: " + path.string());
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorCode::ParseError, "cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::ParseError, "cannot decode PNG " + path.string() + ": " + message);
  }
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  MaskImage mask(w, h);
  for (std::size_t i = 0; i < buffer.size(); ++i) mask.values()[i] = buffer[i] >= 128 ? 1.0 : 0.0;
  return mask;
}

void saveMaskPng(const MaskImage& mask, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(mask.width());
  image.height = static_cast<png_uint_32>(mask.height());
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(mask.values().size());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const double v = std::clamp(mask.values()[i], 0.0, 1.0);
    buffer[i] = static_cast<png_byte>(std::lround(v * 255.0));
  }
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, "cannot write PNG " + path.string() + ": " + image.message);
  }
}

RgbImage loadRgbPng(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::MissingAsset, "image not found: " + path.string());
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorCode::ParseError, "cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::ParseError, "cannot decode PNG " + path.string() + ": " + message);
  }
  return out;
}

std::vector<std::uint8_t> encodePng(const RgbImage& rgb) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(rgb.width);
  image.height = static_cast<png_uint_32>(rgb.height);
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, rgb.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, std::string("cannot encode PNG: ") + image.message);
  }
  std::vector<std::uint8_t> bytes(size);
  if (!png_image_write_to_memory(&image, bytes.data(), &size, 0, rgb.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, std::string("cannot encode PNG: ") + image.message);
  }
  bytes.resize(size);
  return bytes;
}

RgbImage overlayMasks(const RgbImage& background, const MaskImage& human, const MaskImage& object) {
  for (const MaskImage* m : {&human, &object}) {
    if (m->width() != background.width || m->height() != background.height) {
      throw Error(ErrorCode::DimensionMismatch, "overlay mask does not match the frame");
    }
  }
  RgbImage out = background;
  const std::size_t n = static_cast<std::size_t>(background.width) * background.height;
  for (std::size_t i = 0; i < n; ++i) {
    auto tint = [&](double a, int channel) {
      if (a <= 0.0) return;
      a = 0.5 * std::min(a, 1.0);
      for (int c = 0; c < 3; ++c) {
        const double target = c == channel ? 255.0 : 0.0;
        std::uint8_t& v = out.pixels[3 * i + c];
        v = static_cast<std::uint8_t>(std::lround((1.0 - a) * v + a * target));
      }
    };
    tint(human.values()[i], 0);
    tint(object.values()[i], 1);
  }
  return out;
}

}  // namespace hoi
