#include "himol/binio.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "himol/error.hpp"

namespace himol::binio {

void Writer::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void Writer::f64s(std::span<const double> values) {
  for (double v : values) f64(v);
}

void Writer::str(std::string_view s) {
  u64(s.size());
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void Reader::need(std::size_t n) const {
  if (data_.size() - pos_ < n) throw FormatError("truncated binary payload");
}

std::uint32_t Reader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
  return v;
}

std::uint64_t Reader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
  return v;
}

double Reader::f64() { return std::bit_cast<double>(u64()); }

std::vector<double> Reader::f64s(std::size_t count) {
  need(count * 8);
  std::vector<double> out(count);
  for (auto& v : out) v = f64();
  return out;
}

std::string Reader::str() {
  const std::uint64_t n = u64();
  need(n);
  std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
  pos_ += n;
  return s;
}

namespace {
std::uint32_t checksum(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), bytes.data(), static_cast<uInt>(bytes.size())));
}
}  // namespace

std::vector<std::uint8_t> seal(const Magic& magic, std::uint32_t version, const Writer& payload) {
  Writer out;
  std::vector<std::uint8_t> file(magic.begin(), magic.end());
  out.u32(version);
  file.insert(file.end(), out.bytes().begin(), out.bytes().end());
  file.insert(file.end(), payload.bytes().begin(), payload.bytes().end());
  Writer tail;
  tail.u32(checksum(payload.bytes()));
  file.insert(file.end(), tail.bytes().begin(), tail.bytes().end());
  return file;
}

std::vector<std::uint8_t> unseal(std::span<const std::uint8_t> file, const Magic& magic,
                                 std::uint32_t version, std::string_view what) {
  const std::string name(what);
  if (file.size() < magic.size() + 8 || std::memcmp(file.data(), magic.data(), magic.size()) != 0) {
    throw FormatError(name + ": bad magic bytes (not a " + name + " file)");
  }
  Reader head(file.subspan(magic.size(), 4));
  const std::uint32_t found = head.u32();
  if (found != version) {
    throw FormatError(name + ": unsupported format version " + std::to_string(found) +
                      " (expected " + std::to_string(version) + ")");
  }
  auto payload = file.subspan(magic.size() + 4, file.size() - magic.size() - 8);
  Reader tail(file.subspan(file.size() - 4));
  if (tail.u32() != checksum(payload)) throw FormatError(name + ": checksum mismatch");
  return {payload.begin(), payload.end()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace himol::binio
