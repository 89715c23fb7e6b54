#pragma once

// Prime-order group arithmetic, Pedersen commitments, Schnorr signatures and
// domain-separated hashing. The group is ristretto255 (libsodium): every value
// type here is an immutable 32-byte canonical encoding, so copies are cheap and
// sharing across threads needs no locking.

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "taxledger/bytes.hpp"

namespace taxledger {

inline constexpr std::string_view kTagGeneratorH = "TAXP/gen/h/v1";
inline constexpr std::string_view kTagSignature = "TAXP/sig/v1";
inline constexpr std::string_view kTagAddress = "TAXP/addr/v1";
inline constexpr std::string_view kTagKeygen = "TAXP/keygen/v1";

inline constexpr std::size_t kScalarBytes = 32;
inline constexpr std::size_t kElementBytes = 32;
inline constexpr std::size_t kAddressBytes = 25;
inline constexpr std::size_t kSignatureBytes = 64;

using Digest = std::array<std::uint8_t, 32>;

/// Initializes libsodium once. Called implicitly by every entry point that
/// needs it; exposed for tools that want to fail early.
void crypto_init();

Digest sha256(ByteView data);

class Rng;

/// Element of Z_q, always reduced.
class Scalar {
 public:
  Scalar() = default;  // zero

  static Scalar from_u64(std::uint64_t v);
  /// Decodes 32 big-endian bytes; throws DecodeError unless the value is < q.
  static Scalar from_bytes(ByteView be);
  /// Reduces 64 little-endian bytes modulo q (uniform for uniform input).
  static Scalar reduce_wide(const std::array<std::uint8_t, 64>& le);
  static Scalar random(Rng& rng);
  static Scalar one() { return from_u64(1); }

  std::array<std::uint8_t, kScalarBytes> to_bytes() const;  // big-endian
  const std::array<std::uint8_t, kScalarBytes>& le() const { return le_; }

  bool is_zero() const;
  /// Multiplicative inverse; throws InvalidArgument for zero.
  Scalar inverse() const;

  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  Scalar operator-() const;
  Scalar& operator+=(const Scalar& b) { return *this = *this + b; }

  friend bool operator==(const Scalar&, const Scalar&) = default;

 private:
  std::array<std::uint8_t, kScalarBytes> le_{};
};

/// Big-endian hex of the scalar, for logs and text mirrors.
std::string to_hex(const Scalar& s);

/// Element of the prime-order group, stored in canonical compressed form.
/// Written additively: `a + b` is the group operation, `a * s` exponentiation.
class GroupElement {
 public:
  GroupElement() = default;  // identity

  static GroupElement identity() { return {}; }
  /// Throws DecodeError if the bytes are not a canonical group encoding.
  static GroupElement from_bytes(ByteView bytes);
  /// Fixed base multiple of the standard generator g.
  static GroupElement base_mul(const Scalar& s);

  const std::array<std::uint8_t, kElementBytes>& to_bytes() const { return enc_; }
  bool is_identity() const;

  friend GroupElement operator+(const GroupElement& a, const GroupElement& b);
  friend GroupElement operator-(const GroupElement& a, const GroupElement& b);
  friend GroupElement operator*(const GroupElement& p, const Scalar& s);
  friend GroupElement operator*(const Scalar& s, const GroupElement& p) { return p * s; }
  GroupElement operator-() const { return identity() - *this; }
  GroupElement& operator+=(const GroupElement& b) { return *this = *this + b; }

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;

 private:
  std::array<std::uint8_t, kElementBytes> enc_{};
};

std::string to_hex(const GroupElement& p);

/// hash_to_scalar(tag, m) = SHA-512(u32be(|tag|) || tag || m) reduced mod q.
Scalar hash_to_scalar(std::string_view tag, ByteView msg);
/// Same framing, mapped into the group with the ristretto255 one-way map.
GroupElement hash_to_group(std::string_view tag, ByteView msg);
/// SHA-256 with the same tag framing.
Digest tagged_hash(std::string_view tag, ByteView msg);

/// Public parameters: the group, its generator g and a second generator h
/// whose discrete log to base g nobody knows.
struct GroupParams {
  std::string group_id;
  GroupElement g;
  GroupElement h;
};

/// The fixed parameters: g is the ristretto255 base point and
/// h = hash_to_group("TAXP/gen/h/v1", encode(g)).
const GroupParams& setup_group();

/// Big-endian bytes of the group order q.
std::array<std::uint8_t, 32> group_order();

/// g^m * h^r (written m*g + r*h).
GroupElement pedersen_commit(const Scalar& m, const Scalar& r, const GroupParams& params);

// Deterministic expandable randomness: block i is
// SHA-512("TAXP/rng/v1" framing, seed || u64be(i)). Seeds come from the
// caller for reproducible runs or from system entropy.
class Rng {
 public:
  explicit Rng(ByteView seed);
  static Rng from_entropy();

  void fill(std::span<std::uint8_t> out);
  std::uint64_t next_u64();
  /// Uniform in [0, bound); bound must be nonzero.
  std::uint64_t uniform(std::uint64_t bound);

 private:
  Digest seed_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 64> block_{};
  std::size_t used_ = 64;
};

struct KeyPair {
  Scalar sk;
  GroupElement vk;  // g^sk
};

/// sk = hash_to_scalar("TAXP/keygen/v1", seed); throws InvalidArgument on
/// an empty seed.
KeyPair keygen(ByteView seed);
inline KeyPair keygen(std::string_view seed) { return keygen(as_bytes(seed)); }

/// 25-byte pay-to-key-hash style address:
/// 0x00 || first 20 bytes of tagged_hash("TAXP/addr/v1", vk) || 4-byte checksum,
/// the checksum being the first 4 bytes of SHA-256 over the preceding 21 bytes.
struct Address {
  std::array<std::uint8_t, kAddressBytes> bytes{};

  static Address from_bytes(ByteView b);
  bool checksum_ok() const;

  friend bool operator==(const Address&, const Address&) = default;
  friend auto operator<=>(const Address&, const Address&) = default;
};

Address hash_to_address(const GroupElement& vk);
std::string to_hex(const Address& a);

/// Schnorr signature (e, s): R = g^k, e = H(R || vk || msg), s = k + e*sk.
/// Encoded as e || s, two big-endian scalars.
struct Signature {
  std::array<std::uint8_t, kSignatureBytes> bytes{};

  static Signature from_bytes(ByteView b);
  friend bool operator==(const Signature&, const Signature&) = default;
};

/// Nonce k is derived deterministically from sk and msg.
Signature sign(ByteView msg, const Scalar& sk);
/// Never throws; malformed signatures simply fail.
bool verify(ByteView msg, const Signature& sig, const GroupElement& vk);

}  // namespace taxledger
