#include <doctest.h>
#include <sodium.h>

#include <set>

#include "taxledger/crypto.hpp"

using namespace taxledger;

namespace {

// Repeated group addition, independent of scalar multiplication.
GroupElement iterated_sum(const GroupElement& p, int times) {
  GroupElement acc;
  for (int i = 0; i < times; ++i) acc = acc + p;
  return acc;
}

}  // namespace

TEST_CASE("setup_group is deterministic with valid distinct generators") {
  const auto& a = setup_group();
  const auto& b = setup_group();
  CHECK_FALSE(a.g.is_identity());
  CHECK_FALSE(a.h.is_identity());
  CHECK(a.g != a.h);
  CHECK(a.g.to_bytes() == b.g.to_bytes());
  CHECK(a.h.to_bytes() == b.h.to_bytes());
  CHECK(a.group_id == "ristretto255");
}

TEST_CASE("h is the hash-to-group image of g under the generator tag") {
  // Recompute the derivation straight from libsodium primitives.
  const auto& params = setup_group();
  const std::string tag = "TAXP/gen/h/v1";
  std::vector<std::uint8_t> input = {0, 0, 0, static_cast<std::uint8_t>(tag.size())};
  input.insert(input.end(), tag.begin(), tag.end());
  std::array<std::uint8_t, 32> g{};
  std::array<std::uint8_t, 32> one{1};
  REQUIRE(crypto_scalarmult_ristretto255_base(g.data(), one.data()) == 0);
  input.insert(input.end(), g.begin(), g.end());
  std::array<std::uint8_t, 64> wide{};
  crypto_hash_sha512(wide.data(), input.data(), input.size());
  std::array<std::uint8_t, 32> h{};
  crypto_core_ristretto255_from_hash(h.data(), wide.data());
  CHECK(params.g.to_bytes() == g);
  CHECK(params.h.to_bytes() == h);
}

TEST_CASE("pedersen_commit small cases") {
  const auto& params = setup_group();
  CHECK(pedersen_commit(Scalar{}, Scalar{}, params).is_identity());
  CHECK(pedersen_commit(Scalar::one(), Scalar{}, params) == params.g);
  CHECK(pedersen_commit(Scalar::from_u64(5), Scalar::from_u64(7), params) ==
        iterated_sum(params.g, 5) + iterated_sum(params.h, 7));
}

TEST_CASE("pedersen_commit is additively homomorphic") {
  const auto& params = setup_group();
  Rng rng(as_bytes("homomorphism"));
  for (int i = 0; i < 200; ++i) {
    auto m1 = Scalar::random(rng), r1 = Scalar::random(rng);
    auto m2 = Scalar::random(rng), r2 = Scalar::random(rng);
    CHECK(pedersen_commit(m1, r1, params) + pedersen_commit(m2, r2, params) ==
          pedersen_commit(m1 + m2, r1 + r2, params));
  }
}

TEST_CASE("scalar arithmetic edge cases") {
  CHECK((Scalar::from_u64(3) * Scalar::from_u64(3).inverse()) == Scalar::one());
  CHECK_THROWS_AS(Scalar{}.inverse(), InvalidArgument);
  CHECK((-Scalar::one() + Scalar::one()).is_zero());
  // q itself and q-1
  auto q = group_order();
  CHECK_THROWS_AS(Scalar::from_bytes(q), DecodeError);
  auto q_minus_1 = q;
  q_minus_1[31] -= 1;
  CHECK(Scalar::from_bytes(q_minus_1) == -Scalar::one());
  CHECK(Scalar::from_u64(0x0102).to_bytes()[30] == 0x01);
  CHECK_THROWS_AS(Scalar::from_bytes(Bytes(31)), DecodeError);
}

TEST_CASE("canonical encodings round-trip") {
  Rng rng(as_bytes("roundtrip"));
  const auto& params = setup_group();
  for (int i = 0; i < 10000; ++i) {
    auto s = Scalar::random(rng);
    CHECK(Scalar::from_bytes(s.to_bytes()) == s);
    auto p = params.g * s;
    auto enc = p.to_bytes();
    CHECK(GroupElement::from_bytes(enc).to_bytes() == enc);
  }
  CHECK(GroupElement::from_bytes(GroupElement::identity().to_bytes()).is_identity());
}

TEST_CASE("invalid group encodings are rejected") {
  std::array<std::uint8_t, 32> bad{};
  bad.fill(0xff);
  CHECK_THROWS_AS(GroupElement::from_bytes(bad), DecodeError);
  CHECK_THROWS_AS(GroupElement::from_bytes(Bytes(33)), DecodeError);
}

TEST_CASE("keygen") {
  auto a = keygen("alice");
  auto b = keygen("alice");
  auto c = keygen("bob");
  CHECK(a.sk == b.sk);
  CHECK(a.vk == b.vk);
  CHECK(a.vk != c.vk);
  CHECK(a.vk == setup_group().g * a.sk);
  CHECK_THROWS_AS(keygen(std::string_view{}), InvalidArgument);
}

TEST_CASE("sign and verify") {
  auto kp = keygen("signer");
  auto other = keygen("other");
  const std::string msg = "pay 10 to bob";
  auto sig = sign(as_bytes(msg), kp.sk);
  CHECK(verify(as_bytes(msg), sig, kp.vk));
  CHECK_FALSE(verify(as_bytes(msg), sig, other.vk));
  CHECK(sign(as_bytes(msg), kp.sk) == sig);

  SUBCASE("malformed signature fails without throwing") {
    Signature junk;
    junk.bytes.fill(0xff);
    CHECK_FALSE(verify(as_bytes(msg), junk, kp.vk));
  }

  SUBCASE("single-bit mutations are rejected") {
    Rng rng(as_bytes("mutations"));
    int accepted = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      Bytes m(1 + rng.uniform(64));
      rng.fill(m);
      auto s = sign(m, kp.sk);
      Bytes mutated = m;
      auto bit = rng.uniform(m.size() * 8);
      mutated[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      accepted += verify(mutated, s, kp.vk);
      Signature ms = s;
      auto sbit = rng.uniform(kSignatureBytes * 8);
      ms.bytes[sbit / 8] ^= static_cast<std::uint8_t>(1u << (sbit % 8));
      accepted += verify(m, ms, kp.vk);
    }
    CHECK(accepted == 0);
  }
}

TEST_CASE("hash_to_address") {
  auto kp = keygen("addr");
  auto a = hash_to_address(kp.vk);
  CHECK(a == hash_to_address(kp.vk));
  CHECK(a.bytes.size() == 25);
  CHECK(a.bytes[0] == 0x00);
  CHECK(a.checksum_ok());

  Rng rng(as_bytes("birthday"));
  std::set<Address> seen;
  for (int i = 0; i < 10000; ++i) seen.insert(hash_to_address(GroupElement::base_mul(Scalar::random(rng))));
  CHECK(seen.size() == 10000);
}

TEST_CASE("rng is reproducible and seed-sensitive") {
  Rng a(as_bytes("seed")), b(as_bytes("seed")), c(as_bytes("seed2"));
  auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  for (int i = 0; i < 1000; ++i) CHECK(a.uniform(7) < 7);
  CHECK_THROWS_AS(a.uniform(0), InvalidArgument);
}
