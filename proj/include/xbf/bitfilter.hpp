#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace xbf {

// Fixed-length bit vector used both as an in-packet filter and as a link
// identifier. Bit 0 is the least significant bit of byte 0.
class BitFilter {
public:
  BitFilter() = default;

  explicit BitFilter(std::size_t bits)
      : m_(bits), words_((bits + 63) / 64, 0) {
    if (bits == 0) throw std::invalid_argument("BitFilter: length must be >= 1");
  }

  std::size_t size() const { return m_; }

  void set(std::size_t i) {
    check_index(i);
    words_[i >> 6] |= std::uint64_t{1} << (i & 63);
  }

  bool test(std::size_t i) const {
    check_index(i);
    return (words_[i >> 6] >> (i & 63)) & 1;
  }

  std::size_t popcount() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  bool any() const {
    return std::any_of(words_.begin(), words_.end(),
                       [](std::uint64_t w) { return w != 0; });
  }

  BitFilter& operator|=(const BitFilter& o) {
    check_same_length(o);
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }

  // True iff every bit of `id` is also set in this filter: F & id == id.
  bool contains(const BitFilter& id) const {
    check_same_length(id);
    for (std::size_t i = 0; i < words_.size(); ++i)
      if ((words_[i] & id.words_[i]) != id.words_[i]) return false;
    return true;
  }

  friend bool operator==(const BitFilter& a, const BitFilter& b) {
    return a.m_ == b.m_ && a.words_ == b.words_;
  }

  // Byte i holds bits [8i, 8i+8), LSB-first.
  std::vector<std::uint8_t> to_bytes() const {
    if (m_ % 8 != 0)
      throw std::invalid_argument("BitFilter: length not byte-aligned");
    std::vector<std::uint8_t> out(m_ / 8, 0);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = static_cast<std::uint8_t>(words_[i >> 3] >> ((i & 7) * 8));
    return out;
  }

  static BitFilter from_bytes(const std::uint8_t* data, std::size_t n_bytes) {
    BitFilter f(n_bytes * 8);
    for (std::size_t i = 0; i < n_bytes; ++i)
      f.words_[i >> 3] |= std::uint64_t{data[i]} << ((i & 7) * 8);
    return f;
  }

private:
  void check_index(std::size_t i) const {
    if (i >= m_) throw std::out_of_range("BitFilter: bit index out of range");
  }
  void check_same_length(const BitFilter& o) const {
    if (m_ != o.m_)
      throw std::invalid_argument("BitFilter: mixed filter lengths");
  }

  std::size_t m_ = 0;
  std::vector<std::uint64_t> words_;
};

// F := OR of all identifiers on the delivery tree. Empty input yields the
// all-zero filter of length m.
inline BitFilter bf_or(const std::vector<BitFilter>& filters, std::size_t m) {
  BitFilter f(m);
  for (const auto& l : filters) f |= l;
  return f;
}

// Membership test F & l == l.
inline bool bf_member(const BitFilter& f, const BitFilter& l) {
  return f.contains(l);
}

enum class LinkIdMode { random_k, one_bit };

// Per-link filter identifiers, either classical random-k-bit or XBF one-bit.
struct LinkIdAssignment {
  LinkIdMode mode = LinkIdMode::random_k;
  std::size_t m = 0;
  std::size_t k = 0;  // set-bit count in random mode
  std::vector<BitFilter> ids;  // indexed by link
};

// Classical identifiers: k distinct random bits per link, collisions across
// links allowed.
inline LinkIdAssignment gen_random_ids(std::size_t link_count, std::size_t m,
                                       std::size_t k, std::uint64_t seed) {
  if (k > m) throw std::invalid_argument("gen_random_ids: k > m");
  if (k == 0) throw std::invalid_argument("gen_random_ids: k must be >= 1");
  std::mt19937_64 rng(seed);
  LinkIdAssignment a{LinkIdMode::random_k, m, k, {}};
  a.ids.reserve(link_count);
  std::vector<std::size_t> positions(m);
  for (std::size_t i = 0; i < m; ++i) positions[i] = i;
  for (std::size_t e = 0; e < link_count; ++e) {
    // Partial Fisher-Yates: first k entries become the chosen bit positions.
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> d(i, m - 1);
      std::swap(positions[i], positions[d(rng)]);
    }
    BitFilter id(m);
    for (std::size_t i = 0; i < k; ++i) id.set(positions[i]);
    a.ids.push_back(std::move(id));
  }
  return a;
}

// Analytic false-positive probability of a Bloom filter with n inserted
// k-bit identifiers: (1 - e^{-kn/m})^k.
inline double bloom_fpr(std::size_t m, std::size_t k, std::size_t n) {
  const double x = 1.0 - std::exp(-static_cast<double>(k) * n / m);
  return std::pow(x, static_cast<double>(k));
}

}  // namespace xbf
