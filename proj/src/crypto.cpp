#include "taxledger/crypto.hpp"

#include <sodium.h>

#include <algorithm>
#include <mutex>

namespace taxledger {

namespace {

// q = 2^252 + 27742317777372353535851937790883648493, big-endian.
constexpr std::array<std::uint8_t, 32> kOrderBe = {
    0x10, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x14, 0xde, 0xf9, 0xde, 0xa2, 0xf7,
    0x9c, 0xd6, 0x58, 0x12, 0x63, 0x1a, 0x5c, 0xf5, 0xd3, 0xed};

std::array<std::uint8_t, 64> sha512_tagged(std::string_view tag, ByteView msg) {
  crypto_init();
  ByteWriter prefix;
  prefix.str(tag);
  crypto_hash_sha512_state st;
  crypto_hash_sha512_init(&st);
  crypto_hash_sha512_update(&st, prefix.bytes().data(), prefix.bytes().size());
  crypto_hash_sha512_update(&st, msg.data(), msg.size());
  std::array<std::uint8_t, 64> out{};
  crypto_hash_sha512_final(&st, out.data());
  return out;
}

}  // namespace

void crypto_init() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw Error("libsodium initialization failed");
  });
}

Digest sha256(ByteView data) {
  crypto_init();
  Digest out{};
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

Digest tagged_hash(std::string_view tag, ByteView msg) {
  ByteWriter w;
  w.str(tag).raw(msg);
  return sha256(w.bytes());
}

// ---------------------------------------------------------------- Scalar

Scalar Scalar::from_u64(std::uint64_t v) {
  Scalar s;
  for (int i = 0; i < 8; ++i) s.le_[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return s;
}

Scalar Scalar::from_bytes(ByteView be) {
  if (be.size() != kScalarBytes) throw DecodeError("scalar must be 32 bytes");
  if (!std::lexicographical_compare(be.begin(), be.end(), kOrderBe.begin(), kOrderBe.end()))
    throw DecodeError("non-canonical scalar (>= group order)");
  Scalar s;
  std::reverse_copy(be.begin(), be.end(), s.le_.begin());
  return s;
}

Scalar Scalar::reduce_wide(const std::array<std::uint8_t, 64>& le) {
  crypto_init();
  Scalar s;
  crypto_core_ristretto255_scalar_reduce(s.le_.data(), le.data());
  return s;
}

Scalar Scalar::random(Rng& rng) {
  std::array<std::uint8_t, 64> wide{};
  rng.fill(wide);
  return reduce_wide(wide);
}

std::array<std::uint8_t, kScalarBytes> Scalar::to_bytes() const {
  std::array<std::uint8_t, kScalarBytes> be{};
  std::reverse_copy(le_.begin(), le_.end(), be.begin());
  return be;
}

bool Scalar::is_zero() const {
  return std::all_of(le_.begin(), le_.end(), [](std::uint8_t b) { return b == 0; });
}

Scalar Scalar::inverse() const {
  Scalar out;
  if (crypto_core_ristretto255_scalar_invert(out.le_.data(), le_.data()) != 0)
    throw InvalidArgument("zero scalar has no inverse");
  return out;
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  Scalar out;
  crypto_core_ristretto255_scalar_add(out.le_.data(), a.le_.data(), b.le_.data());
  return out;
}

Scalar operator-(const Scalar& a, const Scalar& b) {
  Scalar out;
  crypto_core_ristretto255_scalar_sub(out.le_.data(), a.le_.data(), b.le_.data());
  return out;
}

Scalar operator*(const Scalar& a, const Scalar& b) {
  Scalar out;
  crypto_core_ristretto255_scalar_mul(out.le_.data(), a.le_.data(), b.le_.data());
  return out;
}

Scalar Scalar::operator-() const {
  Scalar out;
  crypto_core_ristretto255_scalar_negate(out.le_.data(), le_.data());
  return out;
}

std::string to_hex(const Scalar& s) { return to_hex(s.to_bytes()); }

std::array<std::uint8_t, 32> group_order() { return kOrderBe; }

// ---------------------------------------------------------- GroupElement

GroupElement GroupElement::from_bytes(ByteView bytes) {
  crypto_init();
  if (bytes.size() != kElementBytes) throw DecodeError("group element must be 32 bytes");
  if (crypto_core_ristretto255_is_valid_point(bytes.data()) != 1)
    throw DecodeError("invalid group element encoding");
  GroupElement p;
  std::copy(bytes.begin(), bytes.end(), p.enc_.begin());
  return p;
}

// libsodium reports an identity result of a scalar multiplication as an
// error; every operand here is already validated, so identity is the answer.
GroupElement GroupElement::base_mul(const Scalar& s) {
  crypto_init();
  GroupElement out;
  if (crypto_scalarmult_ristretto255_base(out.enc_.data(), s.le().data()) != 0) out.enc_.fill(0);
  return out;
}

bool GroupElement::is_identity() const {
  return std::all_of(enc_.begin(), enc_.end(), [](std::uint8_t b) { return b == 0; });
}

GroupElement operator+(const GroupElement& a, const GroupElement& b) {
  GroupElement out;
  if (crypto_core_ristretto255_add(out.enc_.data(), a.enc_.data(), b.enc_.data()) != 0)
    throw DecodeError("invalid group element in addition");
  return out;
}

GroupElement operator-(const GroupElement& a, const GroupElement& b) {
  GroupElement out;
  if (crypto_core_ristretto255_sub(out.enc_.data(), a.enc_.data(), b.enc_.data()) != 0)
    throw DecodeError("invalid group element in subtraction");
  return out;
}

GroupElement operator*(const GroupElement& p, const Scalar& s) {
  crypto_init();
  GroupElement out;
  if (crypto_scalarmult_ristretto255(out.enc_.data(), s.le().data(), p.enc_.data()) != 0)
    out.enc_.fill(0);
  return out;
}

std::string to_hex(const GroupElement& p) { return to_hex(p.to_bytes()); }

// ----------------------------------------------------------------- hashing

Scalar hash_to_scalar(std::string_view tag, ByteView msg) {
  return Scalar::reduce_wide(sha512_tagged(tag, msg));
}

GroupElement hash_to_group(std::string_view tag, ByteView msg) {
  auto wide = sha512_tagged(tag, msg);
  std::array<std::uint8_t, 32> enc{};
  crypto_core_ristretto255_from_hash(enc.data(), wide.data());
  return GroupElement::from_bytes(enc);
}

const GroupParams& setup_group() {
  static const GroupParams params = [] {
    GroupParams p;
    p.group_id = "ristretto255";
    p.g = GroupElement::base_mul(Scalar::one());
    p.h = hash_to_group(kTagGeneratorH, p.g.to_bytes());
    return p;
  }();
  return params;
}

GroupElement pedersen_commit(const Scalar& m, const Scalar& r, const GroupParams& params) {
  return params.g * m + params.h * r;
}

// --------------------------------------------------------------------- Rng

Rng::Rng(ByteView seed) : seed_(tagged_hash("TAXP/rng/seed/v1", seed)) {}

Rng Rng::from_entropy() {
  crypto_init();
  std::array<std::uint8_t, 32> seed{};
  randombytes_buf(seed.data(), seed.size());
  return Rng(seed);
}

void Rng::fill(std::span<std::uint8_t> out) {
  for (auto& byte : out) {
    if (used_ == block_.size()) {
      ByteWriter w;
      w.raw(seed_).u64(counter_++);
      block_ = sha512_tagged("TAXP/rng/v1", w.bytes());
      used_ = 0;
    }
    byte = block_[used_++];
  }
}

std::uint64_t Rng::next_u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  std::uint64_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("uniform bound must be nonzero");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    auto v = next_u64();
    if (v < limit) return v % bound;
  }
}

// ---------------------------------------------------------- keys, address

KeyPair keygen(ByteView seed) {
  if (seed.empty()) throw InvalidArgument("keygen seed must be nonempty");
  KeyPair kp;
  kp.sk = hash_to_scalar(kTagKeygen, seed);
  kp.vk = GroupElement::base_mul(kp.sk);
  return kp;
}

Address Address::from_bytes(ByteView b) {
  if (b.size() != kAddressBytes) throw DecodeError("address must be 25 bytes");
  Address a;
  std::copy(b.begin(), b.end(), a.bytes.begin());
  return a;
}

bool Address::checksum_ok() const {
  auto check = sha256(ByteView{bytes}.first(21));
  return std::equal(check.begin(), check.begin() + 4, bytes.begin() + 21);
}

Address hash_to_address(const GroupElement& vk) {
  Address a;
  a.bytes[0] = 0x00;
  auto h = tagged_hash(kTagAddress, vk.to_bytes());
  std::copy_n(h.begin(), 20, a.bytes.begin() + 1);
  auto check = sha256(ByteView{a.bytes}.first(21));
  std::copy_n(check.begin(), 4, a.bytes.begin() + 21);
  return a;
}

std::string to_hex(const Address& a) { return to_hex(a.bytes); }

// -------------------------------------------------------------- signatures

namespace {

Scalar signature_challenge(const GroupElement& r, const GroupElement& vk, ByteView msg) {
  ByteWriter w;
  w.raw(r.to_bytes()).raw(vk.to_bytes()).raw(msg);
  return hash_to_scalar(kTagSignature, w.bytes());
}

}  // namespace

Signature Signature::from_bytes(ByteView b) {
  if (b.size() != kSignatureBytes) throw DecodeError("signature must be 64 bytes");
  Signature s;
  std::copy(b.begin(), b.end(), s.bytes.begin());
  return s;
}

Signature sign(ByteView msg, const Scalar& sk) {
  const auto vk = GroupElement::base_mul(sk);
  ByteWriter nonce_input;
  nonce_input.raw(sk.to_bytes()).raw(msg);
  const auto k = hash_to_scalar("TAXP/sig/nonce/v1", nonce_input.bytes());
  const auto r = GroupElement::base_mul(k);
  const auto e = signature_challenge(r, vk, msg);
  const auto s = k + e * sk;
  Signature sig;
  auto eb = e.to_bytes();
  auto sb = s.to_bytes();
  std::copy(eb.begin(), eb.end(), sig.bytes.begin());
  std::copy(sb.begin(), sb.end(), sig.bytes.begin() + 32);
  return sig;
}

bool verify(ByteView msg, const Signature& sig, const GroupElement& vk) {
  try {
    const ByteView raw{sig.bytes};
    const auto e = Scalar::from_bytes(raw.first(32));
    const auto s = Scalar::from_bytes(raw.subspan(32));
    // R = g^s * vk^-e
    const auto r = GroupElement::base_mul(s) - vk * e;
    return signature_challenge(r, vk, msg) == e;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace taxledger
