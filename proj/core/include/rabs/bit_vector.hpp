#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rabs {

/// Fixed-length bit vector sized at runtime. Used both for packet feature
/// vectors and for binary agent genomes, which share one representation.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size);

  /// Parses a string of '0'/'1' characters; index 0 is the first character.
  static BitVector from_string(std::string_view bits);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool test(std::size_t i) const;
  void set(std::size_t i, bool value = true);
  void flip(std::size_t i);

  std::size_t count() const noexcept;
  /// Number of positions where the two vectors differ. Sizes must match.
  std::size_t hamming(const BitVector& other) const;
  BitVector complement() const;

  std::string to_string() const;

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend bool operator==(const BitVector&, const BitVector&) = default;
  friend std::strong_ordering operator<=>(const BitVector& a, const BitVector& b);

 private:
  void clear_tail() noexcept;

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace rabs
