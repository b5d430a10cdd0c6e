#include "mixsei/detail/binio.hpp"

#include <array>
#include <bit>
#include <cstdio>

#include "mixsei/errors.hpp"

namespace mixsei::detail {

namespace {

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int nbytes) {
  for (int i = 0; i < nbytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(const std::uint8_t* p, int nbytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < nbytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> t{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    t[i] = c;
  }
  return t;
}

}  // namespace

void ByteWriter::u16(std::uint16_t v) { put_le(bytes, v, 2); }
void ByteWriter::u32(std::uint32_t v) { put_le(bytes, v, 4); }
void ByteWriter::u64(std::uint64_t v) { put_le(bytes, v, 8); }

void ByteWriter::f32(float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  u32(bits);
}

void ByteWriter::f64(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  u64(bits);
}

void ByteWriter::raw(const void* data, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  bytes.insert(bytes.end(), p, p + n);
}

std::uint8_t ByteReader::u8() {
  if (remaining() < 1) throw IoError("truncated file: short read");
  return data[pos++];
}

std::uint16_t ByteReader::u16() {
  if (remaining() < 2) throw IoError("truncated file: short read");
  auto v = static_cast<std::uint16_t>(get_le(data + pos, 2));
  pos += 2;
  return v;
}

std::uint32_t ByteReader::u32() {
  if (remaining() < 4) throw IoError("truncated file: short read");
  auto v = static_cast<std::uint32_t>(get_le(data + pos, 4));
  pos += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  if (remaining() < 8) throw IoError("truncated file: short read");
  std::uint64_t v = get_le(data + pos, 8);
  pos += 8;
  return v;
}

float ByteReader::f32() {
  std::uint32_t bits = u32();
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

double ByteReader::f64() {
  std::uint64_t bits = u64();
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void ByteReader::raw(void* out, std::size_t n) {
  if (remaining() < n) throw IoError("truncated file: short read");
  std::memcpy(out, data + pos, n);
  pos += n;
}

void ByteReader::skip(std::size_t n) {
  if (remaining() < n) throw IoError("truncated file: short read");
  pos += n;
}

std::uint32_t crc32(const std::uint8_t* data, std::size_t n, std::uint32_t seed) {
  static const std::array<std::uint32_t, 256> table = make_crc_table();
  std::uint32_t c = seed ^ 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open file: " + path);
  std::fseek(f, 0, SEEK_END);
  const long len = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<std::uint8_t> bytes(len > 0 ? static_cast<std::size_t>(len) : 0);
  if (!bytes.empty() && std::fread(bytes.data(), 1, bytes.size(), f) != bytes.size()) {
    std::fclose(f);
    throw IoError("read failed: " + path);
  }
  std::fclose(f);
  return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open file for writing: " + path);
  if (!bytes.empty() && std::fwrite(bytes.data(), 1, bytes.size(), f) != bytes.size()) {
    std::fclose(f);
    throw IoError("write failed: " + path);
  }
  if (std::fclose(f) != 0) throw IoError("close failed: " + path);
}

}  // namespace mixsei::detail
