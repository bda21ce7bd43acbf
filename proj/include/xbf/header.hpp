#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "xbf/bitfilter.hpp"
#include "xbf/graph.hpp"
#include "xbf/partition.hpp"

namespace xbf {

// XBF packet header: the dynamic iBF, a filter bitmap of length |P|, and
// the zBF partition-filter set in ascending partition-id order.
struct XbfHeader {
  BitFilter ibf;
  std::vector<bool> filter_bitmap;  // bit i set <=> partition i present in zbf
  std::vector<std::pair<std::uint32_t, BitFilter>> zbf;  // ascending pid
  std::uint32_t entry_partition = 0;

  std::size_t filter_bits() const { return ibf.size(); }

  const BitFilter* find_filter(std::uint32_t pid) const {
    for (const auto& [p, f] : zbf)
      if (p == pid) return &f;
    return nullptr;
  }

  // Header overhead in bits: iBF + bitmap + carried partition filters.
  std::size_t overhead_bits() const {
    return ibf.size() + filter_bitmap.size() + zbf.size() * ibf.size();
  }
};

// Builds the header for a multicast tree: one OR-ed one-bit filter per
// partition the tree touches, iBF preloaded with the entry partition's
// filter.
inline XbfHeader build_header(const std::vector<LinkIndex>& tree_links,
                              const Partitioning& p,
                              std::uint32_t entry_partition) {
  if (tree_links.empty()) throw std::invalid_argument("build_header: empty tree");
  const std::size_t m = p.max_partition_size;

  std::vector<BitFilter> per_partition(p.partition_count);
  std::vector<bool> touched(p.partition_count, false);
  for (LinkIndex e : tree_links) {
    if (e >= p.assignment.size())
      throw std::invalid_argument("build_header: link not in partitioning");
    std::uint32_t pid = p.assignment[e];
    if (!touched[pid]) {
      per_partition[pid] = BitFilter(m);
      touched[pid] = true;
    }
    per_partition[pid].set(p.bit_of_link[e]);
  }
  if (!touched[entry_partition]) {
    per_partition[entry_partition] = BitFilter(m);
    touched[entry_partition] = true;
  }

  XbfHeader h;
  h.entry_partition = entry_partition;
  h.filter_bitmap.assign(p.partition_count, false);
  for (std::uint32_t pid = 0; pid < p.partition_count; ++pid) {
    if (!touched[pid]) continue;
    h.filter_bitmap[pid] = true;
    h.zbf.emplace_back(pid, per_partition[pid]);
  }
  h.ibf = per_partition[entry_partition];
  return h;
}

// ---------------------------------------------------------------------------
// Wire serialization. Layout:
//   0x5B 0x01 | u16be |P| | bitmap ceil(|P|/8) bytes (bit i: byte i/8,
//   mask 1<<(7-i%8)) | iBF m/8 bytes | present filters ascending, m/8 each.

constexpr std::uint8_t kHeaderMagic = 0x5B;
constexpr std::uint8_t kHeaderVersion = 0x01;

inline std::vector<std::uint8_t> serialize(const XbfHeader& h) {
  const std::size_t total_partitions = h.filter_bitmap.size();
  if (total_partitions > 65535)
    throw std::invalid_argument("serialize: more than 65535 partitions");
  if (h.ibf.size() % 8 != 0)
    throw std::invalid_argument("serialize: filter length not byte-aligned");

  std::vector<std::uint8_t> out;
  out.push_back(kHeaderMagic);
  out.push_back(kHeaderVersion);
  out.push_back(static_cast<std::uint8_t>(total_partitions >> 8));
  out.push_back(static_cast<std::uint8_t>(total_partitions & 0xFF));

  std::vector<std::uint8_t> bitmap((total_partitions + 7) / 8, 0);
  for (std::size_t i = 0; i < total_partitions; ++i)
    if (h.filter_bitmap[i]) bitmap[i / 8] |= std::uint8_t(1) << (7 - i % 8);
  out.insert(out.end(), bitmap.begin(), bitmap.end());

  auto append = [&](const BitFilter& f) {
    auto bytes = f.to_bytes();
    out.insert(out.end(), bytes.begin(), bytes.end());
  };
  append(h.ibf);
  for (const auto& [pid, f] : h.zbf) {
    if (f.size() != h.ibf.size())
      throw std::invalid_argument("serialize: mixed filter lengths");
    append(f);
  }
  return out;
}

inline XbfHeader deserialize(const std::vector<std::uint8_t>& data) {
  if (data.size() < 4 || data[0] != kHeaderMagic || data[1] != kHeaderVersion)
    throw std::runtime_error("deserialize: bad magic/version");
  const std::size_t total_partitions =
      (std::size_t(data[2]) << 8) | data[3];
  const std::size_t bitmap_bytes = (total_partitions + 7) / 8;
  if (data.size() < 4 + bitmap_bytes)
    throw std::runtime_error("deserialize: truncated bitmap");

  XbfHeader h;
  h.filter_bitmap.assign(total_partitions, false);
  std::vector<std::uint32_t> present;
  for (std::size_t i = 0; i < total_partitions; ++i) {
    if (data[4 + i / 8] & (std::uint8_t(1) << (7 - i % 8))) {
      h.filter_bitmap[i] = true;
      present.push_back(static_cast<std::uint32_t>(i));
    }
  }
  const std::size_t body = data.size() - 4 - bitmap_bytes;
  if (body == 0 || body % (1 + present.size()) != 0)
    throw std::runtime_error("deserialize: inconsistent body length");
  const std::size_t filter_bytes = body / (1 + present.size());
  const std::uint8_t* p = data.data() + 4 + bitmap_bytes;
  h.ibf = BitFilter::from_bytes(p, filter_bytes);
  p += filter_bytes;
  for (std::uint32_t pid : present) {
    h.zbf.emplace_back(pid, BitFilter::from_bytes(p, filter_bytes));
    p += filter_bytes;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Elias-gamma codes over an MSB-first bit stream.

class BitWriter {
public:
  void push(bool bit) {
    if (nbits_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= std::uint8_t(1) << (7 - nbits_ % 8);
    ++nbits_;
  }
  std::size_t bit_count() const { return nbits_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

private:
  std::vector<std::uint8_t> bytes_;
  std::size_t nbits_ = 0;
};

class BitReader {
public:
  BitReader(const std::vector<std::uint8_t>& bytes, std::size_t nbits)
      : bytes_(bytes), nbits_(nbits) {}
  bool done() const { return pos_ >= nbits_; }
  bool next() {
    if (done()) throw std::runtime_error("BitReader: read past end");
    bool b = bytes_[pos_ / 8] & (std::uint8_t(1) << (7 - pos_ % 8));
    ++pos_;
    return b;
  }

private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t nbits_;
  std::size_t pos_ = 0;
};

// gamma(n): floor(log2 n) zeros, then n's binary digits MSB-first.
inline void elias_gamma_encode(BitWriter& w, std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("elias_gamma_encode: n must be >= 1");
  int width = 64 - std::countl_zero(n);  // number of binary digits
  for (int i = 0; i < width - 1; ++i) w.push(false);
  for (int i = width - 1; i >= 0; --i) w.push((n >> i) & 1);
}

inline std::uint64_t elias_gamma_decode(BitReader& r) {
  int zeros = 0;
  while (!r.next()) ++zeros;
  std::uint64_t n = 1;
  for (int i = 0; i < zeros; ++i) n = (n << 1) | (r.next() ? 1 : 0);
  return n;
}

inline std::size_t elias_gamma_length(std::uint64_t n) {
  return 2 * (64 - std::countl_zero(n)) - 1;
}

// ---------------------------------------------------------------------------
// zBF compression: binary run-length encoding of the concatenated present
// filters, run lengths gamma-coded. The bitmap stays raw so filter offsets
// remain computable before decompression.

struct CompressedZbf {
  bool first_bit = false;
  std::vector<std::uint64_t> run_lengths;
  std::vector<std::uint8_t> bit_stream;  // packed gamma codes
  std::size_t stream_bits = 0;

  // 1 bit for the initial value plus the gamma stream.
  std::size_t compressed_bits() const { return 1 + stream_bits; }
};

inline CompressedZbf compress_zbf(const XbfHeader& h) {
  CompressedZbf c;
  std::vector<bool> bits;
  for (const auto& [pid, f] : h.zbf)
    for (std::size_t i = 0; i < f.size(); ++i) bits.push_back(f.test(i));
  if (bits.empty()) return c;

  c.first_bit = bits[0];
  std::uint64_t run = 1;
  for (std::size_t i = 1; i < bits.size(); ++i) {
    if (bits[i] == bits[i - 1]) {
      ++run;
    } else {
      c.run_lengths.push_back(run);
      run = 1;
    }
  }
  c.run_lengths.push_back(run);

  BitWriter w;
  for (auto r : c.run_lengths) elias_gamma_encode(w, r);
  c.bit_stream = w.bytes();
  c.stream_bits = w.bit_count();
  return c;
}

// Reconstructs the zBF filters; `pids` and `m` come from the (uncompressed)
// bitmap and iBF.
inline std::vector<std::pair<std::uint32_t, BitFilter>> decompress_zbf(
    const CompressedZbf& c, const std::vector<std::uint32_t>& pids,
    std::size_t m) {
  std::vector<bool> bits;
  bits.reserve(pids.size() * m);
  BitReader r(c.bit_stream, c.stream_bits);
  bool value = c.first_bit;
  for (std::size_t i = 0; i < c.run_lengths.size(); ++i) {
    std::uint64_t run = elias_gamma_decode(r);
    if (run != c.run_lengths[i])
      throw std::runtime_error("decompress_zbf: stream/run-length mismatch");
    for (std::uint64_t j = 0; j < run; ++j) bits.push_back(value);
    value = !value;
  }
  if (bits.size() != pids.size() * m)
    throw std::runtime_error("decompress_zbf: bit count mismatch");

  std::vector<std::pair<std::uint32_t, BitFilter>> zbf;
  for (std::size_t fi = 0; fi < pids.size(); ++fi) {
    BitFilter f(m);
    for (std::size_t i = 0; i < m; ++i)
      if (bits[fi * m + i]) f.set(i);
    zbf.emplace_back(pids[fi], std::move(f));
  }
  return zbf;
}

// Header overhead with the zBF compressed; falls back to the raw size plus
// one flag bit when RLE expands the input.
inline std::size_t compressed_overhead_bits(const XbfHeader& h) {
  const std::size_t raw_zbf = h.zbf.size() * h.ibf.size();
  const std::size_t compressed = compress_zbf(h).compressed_bits();
  return h.ibf.size() + h.filter_bitmap.size() + 1 +
         std::min(raw_zbf, compressed);
}

}  // namespace xbf
