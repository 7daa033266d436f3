#pragma once

// Bit packing convention used by every encoding in the library: bit i of a
// BitVector lives in byte i/8 at position i%8 (LSB-first). Unused high bits of
// the last byte are always zero, so byte-wise equality is value equality.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ezk/error.hpp"

namespace ezk {

using Bytes = std::vector<std::uint8_t>;

class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t len) : len_(len), bytes_((len + 7) / 8, 0) {}

  static BitVector from_bytes(std::span<const std::uint8_t> bytes, std::size_t len) {
    require(bytes.size() * 8 >= len, "BitVector::from_bytes: not enough bytes");
    BitVector v(len);
    for (std::size_t i = 0; i < v.bytes_.size(); ++i) v.bytes_[i] = bytes[i];
    v.mask_tail();
    return v;
  }

  static BitVector from_uint(std::uint64_t value, std::size_t len) {
    require(len <= 64, "BitVector::from_uint: len > 64");
    BitVector v(len);
    for (std::size_t i = 0; i < len; ++i) v.set(i, (value >> i) & 1U);
    return v;
  }

  // Characters in index order: "011" has bit0=0, bit1=1, bit2=1.
  static BitVector from_string(std::string_view s) {
    BitVector v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      require(s[i] == '0' || s[i] == '1', "BitVector::from_string: bad char");
      v.set(i, s[i] == '1');
    }
    return v;
  }

  std::size_t size() const { return len_; }
  bool empty() const { return len_ == 0; }
  const Bytes& bytes() const { return bytes_; }

  bool get(std::size_t i) const { return (bytes_[i >> 3] >> (i & 7)) & 1U; }
  bool operator[](std::size_t i) const { return get(i); }
  void set(std::size_t i, bool b) {
    auto m = static_cast<std::uint8_t>(1U << (i & 7));
    if (b)
      bytes_[i >> 3] |= m;
    else
      bytes_[i >> 3] &= static_cast<std::uint8_t>(~m);
  }
  void flip(std::size_t i) { bytes_[i >> 3] ^= static_cast<std::uint8_t>(1U << (i & 7)); }

  void push_back(bool b) {
    if ((len_ & 7) == 0) bytes_.push_back(0);
    ++len_;
    set(len_ - 1, b);
  }

  void append(const BitVector& o) {
    if ((len_ & 7) == 0) {
      bytes_.insert(bytes_.end(), o.bytes_.begin(), o.bytes_.end());
      len_ += o.len_;
      return;
    }
    for (std::size_t i = 0; i < o.len_; ++i) push_back(o.get(i));
  }

  BitVector slice(std::size_t pos, std::size_t n) const {
    require(pos + n <= len_, "BitVector::slice out of range");
    BitVector v(n);
    if ((pos & 7) == 0) {
      for (std::size_t i = 0; i < v.bytes_.size(); ++i) v.bytes_[i] = bytes_[(pos >> 3) + i];
      v.mask_tail();
      return v;
    }
    for (std::size_t i = 0; i < n; ++i) v.set(i, get(pos + i));
    return v;
  }

  BitVector& operator^=(const BitVector& o) {
    require(o.len_ == len_, "BitVector xor: length mismatch");
    for (std::size_t i = 0; i < bytes_.size(); ++i) bytes_[i] ^= o.bytes_[i];
    return *this;
  }
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
  friend bool operator==(const BitVector& a, const BitVector& b) {
    return a.len_ == b.len_ && a.bytes_ == b.bytes_;
  }

  bool any() const {
    for (auto b : bytes_)
      if (b) return true;
    return false;
  }

  std::size_t popcount() const {
    std::size_t c = 0;
    for (auto b : bytes_) c += static_cast<std::size_t>(__builtin_popcount(b));
    return c;
  }

  // Parity of the AND with `o`.
  bool dot(const BitVector& o) const {
    require(o.len_ == len_, "BitVector dot: length mismatch");
    unsigned acc = 0;
    for (std::size_t i = 0; i < bytes_.size(); ++i) acc ^= static_cast<unsigned>(bytes_[i] & o.bytes_[i]);
    return __builtin_parity(acc);
  }

  std::uint64_t to_uint() const {
    require(len_ <= 64, "BitVector::to_uint: len > 64");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < len_; ++i) v |= static_cast<std::uint64_t>(get(i)) << i;
    return v;
  }

  std::string to_string() const {
    std::string s(len_, '0');
    for (std::size_t i = 0; i < len_; ++i)
      if (get(i)) s[i] = '1';
    return s;
  }

 private:
  void mask_tail() {
    if (len_ & 7) bytes_.back() &= static_cast<std::uint8_t>((1U << (len_ & 7)) - 1U);
  }

  std::size_t len_ = 0;
  Bytes bytes_;
};

class GF2Matrix {
 public:
  GF2Matrix() = default;
  GF2Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), stride_((cols + 7) / 8), data_(rows * stride_, 0) {}

  static GF2Matrix identity(std::size_t n) {
    GF2Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
  }

  // `rows` are given as strings in column order, e.g. {"10","01"}.
  static GF2Matrix from_rows(const std::vector<std::string>& rows) {
    require(!rows.empty(), "GF2Matrix::from_rows: empty");
    GF2Matrix m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      require(rows[r].size() == m.cols_, "GF2Matrix::from_rows: ragged");
      m.set_row(r, BitVector::from_string(rows[r]));
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t stride() const { return stride_; }
  const Bytes& data() const { return data_; }
  Bytes& data() { return data_; }

  bool get(std::size_t r, std::size_t c) const {
    return (data_[r * stride_ + (c >> 3)] >> (c & 7)) & 1U;
  }
  void set(std::size_t r, std::size_t c, bool b) {
    auto& byte = data_[r * stride_ + (c >> 3)];
    auto m = static_cast<std::uint8_t>(1U << (c & 7));
    byte = b ? static_cast<std::uint8_t>(byte | m) : static_cast<std::uint8_t>(byte & ~m);
  }

  BitVector row(std::size_t r) const {
    return BitVector::from_bytes(std::span(data_).subspan(r * stride_, stride_), cols_);
  }
  void set_row(std::size_t r, const BitVector& v) {
    require(v.size() == cols_, "GF2Matrix::set_row: width mismatch");
    for (std::size_t i = 0; i < stride_; ++i) data_[r * stride_ + i] = v.bytes()[i];
  }

  BitVector operator*(const BitVector& x) const {
    require(x.size() == cols_, "GF2Matrix multiply: width mismatch");
    BitVector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      unsigned acc = 0;
      const std::uint8_t* row = data_.data() + r * stride_;
      for (std::size_t i = 0; i < stride_; ++i) acc ^= static_cast<unsigned>(row[i] & x.bytes()[i]);
      out.set(r, __builtin_parity(acc));
    }
    return out;
  }

  friend bool operator==(const GF2Matrix& a, const GF2Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0, stride_ = 0;
  Bytes data_;
};

struct GF2Solution {
  BitVector particular;
  std::vector<BitVector> kernel_basis;
  std::size_t rank = 0;
};

// Solves A·x = b. Returns nullopt when the system is inconsistent.
inline std::optional<GF2Solution> gf2_solve(const GF2Matrix& A, const BitVector& b) {
  require(b.size() == A.rows(), "gf2_solve: rhs length != rows");
  const std::size_t rows = A.rows(), cols = A.cols();
  std::vector<BitVector> M(rows);
  BitVector rhs = b;
  for (std::size_t r = 0; r < rows; ++r) M[r] = A.row(r);

  std::vector<std::size_t> pivot_col;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t p = rank;
    while (p < rows && !M[p].get(c)) ++p;
    if (p == rows) continue;
    if (p != rank) {
      std::swap(M[p], M[rank]);
      bool t = rhs.get(p);
      rhs.set(p, rhs.get(rank));
      rhs.set(rank, t);
    }
    for (std::size_t r = 0; r < rows; ++r) {
      if (r != rank && M[r].get(c)) {
        M[r] ^= M[rank];
        if (rhs.get(rank)) rhs.flip(r);
      }
    }
    pivot_col.push_back(c);
    ++rank;
  }
  for (std::size_t r = rank; r < rows; ++r)
    if (rhs.get(r)) return std::nullopt;

  GF2Solution sol;
  sol.rank = rank;
  sol.particular = BitVector(cols);
  for (std::size_t r = 0; r < rank; ++r) sol.particular.set(pivot_col[r], rhs.get(r));

  std::vector<bool> is_pivot(cols, false);
  for (auto c : pivot_col) is_pivot[c] = true;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    BitVector k(cols);
    k.set(f, true);
    for (std::size_t r = 0; r < rank; ++r)
      if (M[r].get(f)) k.set(pivot_col[r], true);
    sol.kernel_basis.push_back(std::move(k));
  }
  return sol;
}

// Canonical byte encoding helpers. Integers are big-endian; variable-length
// fields carry a u32 length prefix.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v >> 8));
    u8(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) u8(static_cast<std::uint8_t>(v >> s));
  }
  void u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) u8(static_cast<std::uint8_t>(v >> s));
  }
  void raw(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void bytes(std::span<const std::uint8_t> b) {
    u32(static_cast<std::uint32_t>(b.size()));
    raw(b);
  }
  // Bit length (u32) followed by the packed bytes.
  void bits(const BitVector& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    raw(v.bytes());
  }
  const Bytes& data() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint16_t u16() {
    std::uint16_t v = static_cast<std::uint16_t>(u8() << 8);
    return static_cast<std::uint16_t>(v | u8());
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | u8();
    return v;
  }
  Bytes raw(std::size_t n) {
    need(n);
    Bytes b(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return b;
  }
  Bytes bytes() { return raw(u32()); }
  BitVector bits() {
    std::uint32_t len = u32();
    const std::size_t n = (static_cast<std::size_t>(len) + 7) / 8;
    need(n);
    const auto b = in_.subspan(pos_, n);
    BitVector v = BitVector::from_bytes(b, len);
    if (n > 0 && v.bytes().back() != b.back()) throw DecodeError("nonzero padding bits");
    pos_ += n;
    return v;
  }
  bool done() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }
  void expect_done() const {
    if (!done()) throw DecodeError("trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw DecodeError("truncated input");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

inline std::string to_hex(std::span<const std::uint8_t> b) {
  static const char* d = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (auto x : b) {
    s.push_back(d[x >> 4]);
    s.push_back(d[x & 15]);
  }
  return s;
}

inline Bytes from_hex(std::string_view s) {
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw DecodeError("bad hex digit");
  };
  if (s.size() % 2) throw DecodeError("odd hex length");
  Bytes out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nib(s[2 * i]) << 4 | nib(s[2 * i + 1]));
  return out;
}

}  // namespace ezk
