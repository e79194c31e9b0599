#pragma once
// Little-endian binary container used by the checkpoint formats:
//   magic (8 bytes) | u32 version | payload | u32 crc32(payload)

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace himol::binio {

class Writer {
 public:
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void f64s(std::span<const double> values);
  void str(std::string_view s);
  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  std::vector<double> f64s(std::size_t count);
  std::string str();
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const;
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

using Magic = std::array<char, 8>;

std::vector<std::uint8_t> seal(const Magic& magic, std::uint32_t version, const Writer& payload);
// Validates magic, version and checksum; returns the payload bytes.
std::vector<std::uint8_t> unseal(std::span<const std::uint8_t> file, const Magic& magic,
                                 std::uint32_t version, std::string_view what);

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace himol::binio
