#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace xbart {

enum class IoErrorCode {
  kBadMagic,
  kVersionMismatch,
  kTruncated,
  kCorrupt,
  kEmptyModel,
};

const char* to_string(IoErrorCode code);

/// Failure to read or write a serialized tree or model.
class IoError : public std::runtime_error {
 public:
  IoError(IoErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  IoErrorCode code() const { return code_; }

 private:
  IoErrorCode code_;
};

namespace io {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written in host order and assume little-endian");

template <typename T>
void write(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw IoError(IoErrorCode::kTruncated, "unexpected end of stream");
  }
  return value;
}

void write_magic(std::ostream& out, const char (&magic)[5]);
void expect_magic(std::istream& in, const char (&magic)[5]);

}  // namespace io
}  // namespace xbart
