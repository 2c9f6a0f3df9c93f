#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace startext {

// 8-bit grayscale image, row-major, values 0..255.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h, 0) {}
  uint8_t& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

void write_png_gray(const std::string& path, const GrayImage& img);
GrayImage read_png_gray(const std::string& path);

// Reads just the IHDR header; cheap existence + dimension check.
bool png_dims(const std::string& path, int* width, int* height);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// FNV-1a 64-bit, used for content-consistency checks (not security).
uint64_t fnv1a64(const void* data, size_t n);
uint64_t fnv1a64(const std::string& s);

}  // namespace startext
