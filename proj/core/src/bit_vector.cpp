#include "rabs/bit_vector.hpp"

#include <bit>
#include <stdexcept>

namespace rabs {

namespace {
constexpr std::size_t kWordBits = 64;

std::size_t word_count(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }
}  // namespace

BitVector::BitVector(std::size_t size) : size_(size), words_(word_count(size), 0) {}

BitVector BitVector::from_string(std::string_view bits) {
  BitVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      v.set(i);
    } else if (bits[i] != '0') {
      throw std::invalid_argument("bit string contains '" + std::string(1, bits[i]) + "'");
    }
  }
  return v;
}

bool BitVector::test(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("BitVector::test index out of range");
  return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
}

void BitVector::set(std::size_t i, bool value) {
  if (i >= size_) throw std::out_of_range("BitVector::set index out of range");
  const std::uint64_t mask = std::uint64_t{1} << (i % kWordBits);
  if (value) {
    words_[i / kWordBits] |= mask;
  } else {
    words_[i / kWordBits] &= ~mask;
  }
}

void BitVector::flip(std::size_t i) {
  if (i >= size_) throw std::out_of_range("BitVector::flip index out of range");
  words_[i / kWordBits] ^= std::uint64_t{1} << (i % kWordBits);
}

std::size_t BitVector::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::size_t BitVector::hamming(const BitVector& other) const {
  if (other.size_ != size_) {
    throw std::invalid_argument("BitVector::hamming length mismatch: " + std::to_string(size_) +
                                " vs " + std::to_string(other.size_));
  }
  std::size_t n = 0;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    n += static_cast<std::size_t>(std::popcount(words_[w] ^ other.words_[w]));
  }
  return n;
}

BitVector BitVector::complement() const {
  BitVector out(*this);
  for (auto& w : out.words_) w = ~w;
  out.clear_tail();
  return out;
}

std::string BitVector::to_string() const {
  std::string s(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if (test(i)) s[i] = '1';
  }
  return s;
}

void BitVector::clear_tail() noexcept {
  const std::size_t rem = size_ % kWordBits;
  if (rem != 0 && !words_.empty()) {
    words_.back() &= (std::uint64_t{1} << rem) - 1;
  }
}

std::strong_ordering operator<=>(const BitVector& a, const BitVector& b) {
  if (auto c = a.size_ <=> b.size_; c != 0) return c;
  return a.words_ <=> b.words_;
}

}  // namespace rabs
