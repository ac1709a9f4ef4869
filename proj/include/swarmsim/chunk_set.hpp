#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace swarmsim {

inline constexpr int kMaxChunks = 64;

// Subset of the chunk indices {0, ..., m-1} packed into one machine word.
// Chunk j (0-based internally) is bit j. Printed 1-based.
class ChunkSet {
 public:
  using word_type = std::uint64_t;

  constexpr ChunkSet() = default;
  constexpr explicit ChunkSet(word_type bits) : bits_(bits) {}

  static constexpr ChunkSet full(int m) {
    return ChunkSet(m >= kMaxChunks ? ~word_type{0} : ((word_type{1} << m) - 1));
  }
  static constexpr ChunkSet single(int j) { return ChunkSet(word_type{1} << j); }
  static ChunkSet of(std::initializer_list<int> chunks) {
    ChunkSet s;
    for (int j : chunks) s.insert(j);
    return s;
  }
  // 1-based convenience used by tests and CSV output
  static ChunkSet of_one_based(std::initializer_list<int> chunks) {
    ChunkSet s;
    for (int j : chunks) s.insert(j - 1);
    return s;
  }

  constexpr word_type bits() const { return bits_; }
  constexpr bool contains(int j) const { return (bits_ >> j) & 1u; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }

  constexpr void insert(int j) { bits_ |= word_type{1} << j; }
  constexpr void erase(int j) { bits_ &= ~(word_type{1} << j); }

  constexpr ChunkSet operator|(ChunkSet o) const { return ChunkSet(bits_ | o.bits_); }
  constexpr ChunkSet operator&(ChunkSet o) const { return ChunkSet(bits_ & o.bits_); }
  // set difference
  constexpr ChunkSet operator-(ChunkSet o) const { return ChunkSet(bits_ & ~o.bits_); }
  constexpr ChunkSet& operator|=(ChunkSet o) { bits_ |= o.bits_; return *this; }

  constexpr bool is_subset_of(ChunkSet o) const { return (bits_ & ~o.bits_) == 0; }

  constexpr auto operator<=>(const ChunkSet&) const = default;

  // Index of the k-th set bit (0-based k), k < size().
  int nth(int k) const {
    word_type b = bits_;
    for (; k > 0; --k) b &= b - 1;
    return std::countr_zero(b);
  }

  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(size());
    for (word_type b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
    return out;
  }

  // "{1,3}" with 1-based indices
  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (int j : members()) {
      if (!first) s += ',';
      s += std::to_string(j + 1);
      first = false;
    }
    return s + "}";
  }

 private:
  word_type bits_ = 0;
};

}  // namespace swarmsim

template <>
struct std::hash<swarmsim::ChunkSet> {
  std::size_t operator()(swarmsim::ChunkSet s) const noexcept {
    return std::hash<std::uint64_t>{}(s.bits());
  }
};
