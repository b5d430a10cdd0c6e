#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace mixsei::detail {

// Explicit little-endian serialization into a growable byte buffer.
// All file formats in the project are defined little-endian.
struct ByteWriter {
  std::vector<std::uint8_t> bytes;

  void u8(std::uint8_t v) { bytes.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void raw(const void* data, std::size_t n);
};

struct ByteReader {
  const std::uint8_t* data = nullptr;
  std::size_t size = 0;
  std::size_t pos = 0;

  std::size_t remaining() const { return size - pos; }
  // Each getter throws IoError on a short read.
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  void raw(void* out, std::size_t n);
  void skip(std::size_t n);
};

// CRC-32 (IEEE 802.3 polynomial, reflected), init/xorout 0xFFFFFFFF.
std::uint32_t crc32(const std::uint8_t* data, std::size_t n,
                    std::uint32_t seed = 0);

// Whole-file read/write; throw IoError on failure.
std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace mixsei::detail
