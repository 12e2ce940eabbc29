#include "predcode/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace predcode {

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
    return r;
  }
  return v;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string encode_weights(const Matrix& m) {
  std::string out(kWeightMagic);
  out += '\n';
  out += std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  const std::size_t header = out.size();
  out.resize(header + 8 * m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(m.data()[i]));
    std::memcpy(out.data() + header + 8 * i, &bits, 8);
  }
  return out;
}

Matrix decode_weights(std::string_view bytes) {
  if (bytes.substr(0, kWeightMagic.size()) != kWeightMagic ||
      bytes.size() <= kWeightMagic.size() || bytes[kWeightMagic.size()] != '\n') {
    throw FormatError("weight file: bad magic string (expected PCW1)");
  }
  std::size_t pos = kWeightMagic.size() + 1;
  const std::size_t eol = bytes.find('\n', pos);
  if (eol == std::string_view::npos) throw FormatError("weight file: truncated header");
  std::istringstream dims{std::string(bytes.substr(pos, eol - pos))};
  long long rows = -1, cols = -1;
  if (!(dims >> rows >> cols) || rows < 0 || cols < 0) {
    throw FormatError("weight file: malformed dimensions");
  }
  pos = eol + 1;
  const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (bytes.size() - pos != 8 * n) {
    throw FormatError("weight file: expected " + std::to_string(8 * n) + " payload bytes, found " +
                      std::to_string(bytes.size() - pos));
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, bytes.data() + pos + 8 * i, 8);
    data[i] = std::bit_cast<double>(to_little_endian(bits));
  }
  return Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(data));
}

void write_weights(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  const std::string bytes = encode_weights(m);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Matrix read_weights(const std::filesystem::path& path) { return decode_weights(slurp(path)); }

std::vector<unsigned char> to_gray8(std::span<const double> values) {
  std::vector<unsigned char> out(values.size(), 128);
  if (values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<unsigned char>(std::lround(255.0 * (values[i] - lo) / (hi - lo)));
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, std::span<const double> values,
               std::size_t height, std::size_t width) {
  if (values.size() != height * width) {
    throw DimensionError("write_pgm", {height, width}, {values.size(), 1});
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "P5\n" << width << " " << height << "\n255\n";
  const auto gray = to_gray8(values);
  out.write(reinterpret_cast<const char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
}

GrayImage read_pgm(const std::filesystem::path& path) {
  const std::string bytes = slurp(path);
  std::istringstream in(bytes);
  std::string magic;
  GrayImage img;
  int maxval = 0;
  if (!(in >> magic) || magic != "P5") throw FormatError(path.string() + ": not a P5 PGM");
  if (!(in >> img.width >> img.height >> maxval) || maxval != 255) {
    throw FormatError(path.string() + ": unsupported PGM header");
  }
  in.get();
  const auto offset = static_cast<std::size_t>(in.tellg());
  if (bytes.size() - offset != img.width * img.height) {
    throw FormatError(path.string() + ": truncated PGM payload");
  }
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
  return img;
}

Matrix load_raw_grayscale(const std::filesystem::path& path, std::size_t height,
                          std::size_t width) {
  const std::string bytes = slurp(path);
  if (bytes.size() != height * width) {
    throw FormatError(path.string() + ": expected " + std::to_string(height * width) +
                      " bytes of raw grayscale, found " + std::to_string(bytes.size()));
  }
  Matrix m(height, width);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    m.data()[i] = static_cast<unsigned char>(bytes[i]) / 255.0;
  }
  return m;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), out_(path, std::ios::trunc), columns_(header.size()) {
  if (!out_) throw FormatError("cannot write " + path.string());
  for (const auto& h : header) field(h);
  end_row();
}

void CsvWriter::separator() {
  if (in_row_ > 0) out_ << ',';
  ++in_row_;
}

CsvWriter& CsvWriter::field(std::string_view s) {
  separator();
  if (s.find_first_of(",\"\n") != std::string_view::npos) {
    out_ << '"';
    for (char c : s) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  } else {
    out_ << s;
  }
  return *this;
}

CsvWriter& CsvWriter::field(double v) {
  separator();
  out_ << format_number(v);
  return *this;
}

CsvWriter& CsvWriter::field(long long v) {
  separator();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) {
    throw FormatError(path_.string() + ": row has " + std::to_string(in_row_) +
                      " fields, header has " + std::to_string(columns_));
  }
  out_ << '\n';
  in_row_ = 0;
}

}  // namespace predcode
