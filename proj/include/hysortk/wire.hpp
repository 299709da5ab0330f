#pragma once

// Byte formats exchanged between ranks. All integers are little-endian.
//
//   SupermerRecord  u16 len | ceil(len/4) packed bytes | [ExtensionBlock]
//   ExtensionBlock  u8 tag | read_id (i8 delta if tag bit0, else u32)
//                          | pos     (i8 delta if tag bit1, else u32)
//   KmerListRecord  W x u64 k-mer words | u32 count
//
// Within a batch, a supermer len of 0 ends the payload. A kmerlist record with
// count 0 ends a kmerlist payload (padding is zero-filled, so the sentinel and
// the padding read the same). See docs/wire-format.md.

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "hysortk/errors.hpp"
#include "hysortk/seq.hpp"
#include "hysortk/supermer.hpp"

namespace hysortk {

inline constexpr std::size_t kSentinelBytes = 2;
inline constexpr std::size_t kFullExtensionBytes = 9;
inline constexpr std::size_t kMaxSupermerLen = 0xFFFF;

inline constexpr std::uint8_t kTagReadDelta = 0x1;
inline constexpr std::uint8_t kTagPosDelta = 0x2;

/// Identifies a (sender, destination, round) stream in diagnostics.
struct StreamId {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::uint32_t round = 0;

  std::string str() const {
    return "stream " + std::to_string(src) + "->" + std::to_string(dst) + " round " +
           std::to_string(round);
  }
};

namespace wire {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

/// Bounds-checked little-endian reader.
class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, StreamId id) : bytes_(bytes), id_(id) {}

  std::size_t offset() const { return off_; }
  std::size_t remaining() const { return bytes_.size() - off_; }
  bool at_end() const { return off_ == bytes_.size(); }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw WireError("truncated " + std::string(what) + " in " + id_.str() + " at offset " +
                      std::to_string(off_));
    }
  }

  std::uint8_t u8() { need(1, "byte"); return bytes_[off_++]; }

  std::uint16_t u16() {
    need(2, "u16");
    const auto v = static_cast<std::uint16_t>(bytes_[off_] | (bytes_[off_ + 1] << 8));
    off_ += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4, "u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[off_ + i]) << (8 * i);
    off_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8, "u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[off_ + i]) << (8 * i);
    off_ += 8;
    return v;
  }

  void bytes(std::uint8_t* dst, std::size_t n, const char* what) {
    need(n, what);
    std::memcpy(dst, bytes_.data() + off_, n);
    off_ += n;
  }

  const StreamId& id() const { return id_; }

 private:
  std::span<const std::uint8_t> bytes_;
  StreamId id_;
  std::size_t off_ = 0;
};

inline bool fits_i8(std::int64_t d) { return d >= -128 && d <= 127; }

}  // namespace wire

/// Delta state for one stream. Encoder and decoder each keep one and update
/// it identically after every record.
struct ExtensionState {
  bool has_prev = false;
  Extension prev;
};

inline std::uint8_t extension_tag(const Extension& e, const ExtensionState& st) {
  if (!st.has_prev) return 0;
  std::uint8_t tag = 0;
  if (wire::fits_i8(std::int64_t{e.read_id} - st.prev.read_id)) tag |= kTagReadDelta;
  if (wire::fits_i8(std::int64_t{e.pos_in_read} - st.prev.pos_in_read)) tag |= kTagPosDelta;
  return tag;
}

inline std::size_t extension_size(const Extension& e, const ExtensionState& st) {
  const std::uint8_t tag = extension_tag(e, st);
  return 1 + ((tag & kTagReadDelta) ? 1 : 4) + ((tag & kTagPosDelta) ? 1 : 4);
}

inline void encode_extension(const Extension& e, ExtensionState& st,
                             std::vector<std::uint8_t>& out) {
  const std::uint8_t tag = extension_tag(e, st);
  out.push_back(tag);
  if (tag & kTagReadDelta) {
    out.push_back(static_cast<std::uint8_t>(static_cast<std::int8_t>(
        std::int64_t{e.read_id} - st.prev.read_id)));
  } else {
    wire::put_u32(out, e.read_id);
  }
  if (tag & kTagPosDelta) {
    out.push_back(static_cast<std::uint8_t>(static_cast<std::int8_t>(
        std::int64_t{e.pos_in_read} - st.prev.pos_in_read)));
  } else {
    wire::put_u32(out, e.pos_in_read);
  }
  st.has_prev = true;
  st.prev = e;
}

inline Extension decode_extension(wire::Reader& in, ExtensionState& st) {
  const std::size_t at = in.offset();
  const std::uint8_t tag = in.u8();
  if (tag & ~(kTagReadDelta | kTagPosDelta)) {
    throw WireError("invalid extension tag in " + in.id().str() + " at offset " +
                    std::to_string(at));
  }
  if (tag != 0 && !st.has_prev) {
    throw WireError("delta extension without a previous record in " + in.id().str() +
                    " at offset " + std::to_string(at));
  }
  Extension e;
  if (tag & kTagReadDelta) {
    e.read_id = static_cast<std::uint32_t>(std::int64_t{st.prev.read_id} +
                                           static_cast<std::int8_t>(in.u8()));
  } else {
    e.read_id = in.u32();
  }
  if (tag & kTagPosDelta) {
    e.pos_in_read = static_cast<std::uint32_t>(std::int64_t{st.prev.pos_in_read} +
                                               static_cast<std::int8_t>(in.u8()));
  } else {
    e.pos_in_read = in.u32();
  }
  st.has_prev = true;
  st.prev = e;
  return e;
}

/// Codec for supermer streams. Decoded supermers carry no task id.
class SupermerCodec {
 public:
  using record_type = Supermer;
  using state_type = ExtensionState;

  SupermerCodec(unsigned k, bool extensions) : k_(k), extensions_(extensions) {}

  unsigned k() const { return k_; }
  bool extensions() const { return extensions_; }

  std::size_t encoded_size(const Supermer& sm, const state_type& st) const {
    std::size_t n = 2 + (sm.len + 3) / 4;
    if (extensions_) n += extension_size(sm.ext, st);
    return n;
  }

  // Largest size a record can take (first record of a stream).
  std::size_t max_size(std::uint32_t len) const {
    return 2 + (len + 3) / 4 + (extensions_ ? kFullExtensionBytes : 0);
  }

  void encode(const Supermer& sm, state_type& st, std::vector<std::uint8_t>& out) const {
    if (sm.len < k_ || sm.len > kMaxSupermerLen) {
      throw InternalError("supermer length " + std::to_string(sm.len) + " not encodable");
    }
    wire::put_u16(out, static_cast<std::uint16_t>(sm.len));
    out.insert(out.end(), sm.packed.begin(), sm.packed.begin() + (sm.len + 3) / 4);
    if (extensions_) encode_extension(sm.ext, st, out);
  }

  /// Decodes until the len=0 sentinel or a clean end of input.
  std::vector<Supermer> decode(std::span<const std::uint8_t> bytes, StreamId id = {}) const {
    std::vector<Supermer> out;
    decode_into(bytes, id, out);
    return out;
  }

  void decode_into(std::span<const std::uint8_t> bytes, StreamId id,
                   std::vector<Supermer>& out) const {
    wire::Reader in(bytes, id);
    state_type st;
    while (!in.at_end()) {
      const std::size_t at = in.offset();
      const std::uint16_t len = in.u16();
      if (len == 0) return;
      if (len < k_) {
        throw WireError("supermer len " + std::to_string(len) + " < k=" + std::to_string(k_) +
                        " in " + id.str() + " at offset " + std::to_string(at));
      }
      Supermer sm;
      sm.len = len;
      sm.packed.resize((len + 3) / 4);
      in.bytes(sm.packed.data(), sm.packed.size(), "supermer bases");
      if (extensions_) sm.ext = decode_extension(in, st);
      out.push_back(std::move(sm));
    }
  }

 private:
  unsigned k_;
  bool extensions_;
};

/// (k-mer, count) tuple exchanged for heavy-hitter tasks.
template <std::size_t W>
struct KmerCount {
  PackedKmer<W> kmer;
  std::uint32_t count = 0;

  friend bool operator==(const KmerCount&, const KmerCount&) = default;
};

template <std::size_t W>
class KmerListCodec {
 public:
  using record_type = KmerCount<W>;
  struct state_type {};

  static constexpr std::size_t kRecordBytes = 8 * W + 4;

  std::size_t encoded_size(const record_type&, const state_type&) const { return kRecordBytes; }
  std::size_t max_size() const { return kRecordBytes; }

  void encode(const record_type& r, state_type&, std::vector<std::uint8_t>& out) const {
    if (r.count == 0) throw InternalError("kmerlist record with count 0");
    for (auto w : r.kmer.words) wire::put_u64(out, w);
    wire::put_u32(out, r.count);
  }

  std::vector<record_type> decode(std::span<const std::uint8_t> bytes, StreamId id = {}) const {
    std::vector<record_type> out;
    decode_into(bytes, id, out);
    return out;
  }

  void decode_into(std::span<const std::uint8_t> bytes, StreamId id,
                   std::vector<record_type>& out) const {
    wire::Reader in(bytes, id);
    while (in.remaining() >= kRecordBytes) {
      record_type r;
      for (auto& w : r.kmer.words) w = in.u64();
      r.count = in.u32();
      if (r.count == 0) return;
      out.push_back(r);
    }
    // A short tail is only valid as part of the zero sentinel/padding.
    while (!in.at_end()) {
      const std::size_t at = in.offset();
      if (in.u8() != 0) {
        throw WireError("truncated kmerlist record in " + id.str() + " at offset " +
                        std::to_string(at));
      }
    }
  }
};

template <class Codec>
std::vector<std::uint8_t> encode_stream(std::span<const typename Codec::record_type> records,
                                        const Codec& codec) {
  std::vector<std::uint8_t> out;
  typename Codec::state_type st{};
  for (const auto& r : records) codec.encode(r, st, out);
  return out;
}

template <class Codec>
std::vector<typename Codec::record_type> decode_stream(std::span<const std::uint8_t> bytes,
                                                       const Codec& codec, StreamId id = {}) {
  return codec.decode(bytes, id);
}

inline std::vector<std::uint8_t> encode_supermer_stream(std::span<const Supermer> records,
                                                        unsigned k, bool extensions) {
  return encode_stream(records, SupermerCodec(k, extensions));
}

inline std::vector<Supermer> decode_supermer_stream(std::span<const std::uint8_t> bytes,
                                                    unsigned k, bool extensions) {
  return SupermerCodec(k, extensions).decode(bytes);
}

/// Payload + len=0 sentinel + zero fill, exactly batch_size bytes.
inline std::vector<std::uint8_t> pad_batch(std::span<const std::uint8_t> payload,
                                           std::size_t batch_size) {
  if (payload.size() + kSentinelBytes > batch_size) {
    throw InternalError("batch overfilled: payload " + std::to_string(payload.size()) +
                        " bytes, batch " + std::to_string(batch_size));
  }
  std::vector<std::uint8_t> out(batch_size, 0);
  std::memcpy(out.data(), payload.data(), payload.size());
  return out;
}

inline std::size_t padding_bytes(std::size_t payload, std::size_t batch_size) {
  return batch_size - payload;
}

}  // namespace hysortk
