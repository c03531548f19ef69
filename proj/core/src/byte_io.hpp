#pragma once

// Little-endian byte packing shared by the checkpoint and feature-cache
// codecs. Private to the library; the on-disk formats it backs are versioned
// by their own magics.

#include <bit>
#include <cstdint>
#include <string>

#include "mrgnn/errors.hpp"

namespace mrgnn::detail {

inline void append_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void append_f64(std::string& out, double v) {
  append_u64(out, std::bit_cast<std::uint64_t>(v));
}

// Sequential bounds-checked reader over an in-memory image. Throws DataError
// mentioning `what` on truncation, so callers can name the field being read.
class ByteCursor {
 public:
  ByteCursor(const std::string& bytes, std::string context)
      : bytes_(bytes), context_(std::move(context)) {}

  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

  std::string str(std::uint64_t len, const char* what) {
    need(len, what);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  void need(std::uint64_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw DataError(context_ + " truncated while reading " + what);
    }
  }

  const std::string& bytes_;
  std::string context_;
  std::size_t pos_ = 0;
};

}  // namespace mrgnn::detail
