#pragma once

// File formats shared by every module:
//   * weight files: "PCW1\n<rows> <cols>\n" then rows*cols little-endian
//     IEEE-754 doubles, row-major;
//   * binary PGM (P5, maxval 255) for weight/image visualization;
//   * CSV with a mandatory header row;
//   * raw 8-bit grayscale images.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "predcode/core.hpp"

namespace predcode {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kWeightMagic = "PCW1";

void write_weights(const std::filesystem::path& path, const Matrix& m);
Matrix read_weights(const std::filesystem::path& path);

std::string encode_weights(const Matrix& m);
Matrix decode_weights(std::string_view bytes);

/// Min-max scales `values` into 0..255. A constant input maps to 128.
std::vector<unsigned char> to_gray8(std::span<const double> values);

/// Writes `values` (height*width, row-major) as a P5 image after min-max scaling.
void write_pgm(const std::filesystem::path& path, std::span<const double> values,
               std::size_t height, std::size_t width);

struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<unsigned char> pixels;
};

GrayImage read_pgm(const std::filesystem::path& path);

/// Reads height*width raw 8-bit pixels and returns them scaled to [0, 1].
Matrix load_raw_grayscale(const std::filesystem::path& path, std::size_t height,
                          std::size_t width);

/// Minimal CSV writer. Numbers are printed with %.17g so output is exact and
/// byte-stable for identical inputs.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  CsvWriter& field(std::string_view s);
  CsvWriter& field(double v);
  CsvWriter& field(long long v);
  CsvWriter& field(std::size_t v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
  void end_row();

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void separator();

  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

std::string format_number(double v);

}  // namespace predcode
