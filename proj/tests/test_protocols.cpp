#include <doctest.h>

#include "taxledger/protocols.hpp"

using namespace taxledger;

namespace {

const GroupParams& P() { return setup_group(); }

struct Instance {
  GeneratedAssets assets;
  AssetCommitments comms;
  CommitmentSet published() const { return {assets.set, comms}; }
  AssetDeclStatement asset_statement() const {
    return {aggregate_commitment(comms, P()), total_assets(assets.set, assets.witness)};
  }
  AddressAuditStatement address_statement(std::uint32_t index) const {
    return AddressAuditStatement::from_set(published(), index);
  }
  AddressAuditWitness address_witness(std::uint32_t index) const {
    return {assets.witness.blinders_t[index - 1], assets.witness.blinders_v[index - 1]};
  }
};

Instance make_instance(Rng& rng, std::vector<bool> owned) {
  std::vector<std::uint64_t> bal;
  for (std::size_t i = 0; i < owned.size(); ++i) bal.push_back(rng.uniform(1u << 30));
  Instance inst{generate_assets(owned.size(), owned, bal, rng, P()), {}};
  inst.comms = build_asset_commitments(inst.assets.set, inst.assets.witness, P());
  return inst;
}

SigmaTranscript run_asset(SigmaProver prover, const Scalar& c, const Scalar& v) {
  SigmaTranscript t{prover.commitment(), c, {}};
  t.response = {prover.respond_asset(c, v)};
  return t;
}

SigmaTranscript run_address(SigmaProver prover, const Scalar& c, const AddressAuditWitness& w) {
  SigmaTranscript t{prover.commitment(), c, {}};
  t.response = prover.respond_address(c, w.t, w.v);
  return t;
}

Scalar nonzero_challenge(Rng& rng) {
  for (;;) {
    auto c = Scalar::random(rng);
    if (!c.is_zero()) return c;
  }
}

}  // namespace

TEST_CASE("asset declaration first message") {
  Rng a(as_bytes("step1")), b(as_bytes("step1"));
  auto pa = asset_decl_prove_step1(a, P());
  auto pb = asset_decl_prove_step1(b, P());
  CHECK(pa.commitment() == pb.commitment());
  REQUIRE(pa.commitment().size() == 1);
  CHECK(pa.commitment()[0] == P().h * pa.nonces_for_testing()[0]);

  auto zero = SigmaProver::with_nonces_for_testing(ProtocolId::kAssetDeclaration, {Scalar{}}, P());
  CHECK(zero.commitment()[0].is_identity());
}

TEST_CASE("asset declaration response") {
  Rng rng(as_bytes("respond"));
  for (int i = 0; i < 50; ++i) {
    auto prover = asset_decl_prove_step1(rng, P());
    const auto r = prover.nonces_for_testing()[0];
    auto c = Scalar::random(rng), v = Scalar::random(rng);
    auto theta = prover.respond_asset(c, v);
    CHECK(theta - r == c * v);
    CHECK(prover.consumed());
  }
  auto p1 = asset_decl_prove_step1(rng, P());
  auto r = p1.nonces_for_testing()[0];
  CHECK(p1.respond_asset(Scalar{}, Scalar::random(rng)) == r);
  auto p2 = asset_decl_prove_step1(rng, P());
  r = p2.nonces_for_testing()[0];
  CHECK(p2.respond_asset(Scalar::random(rng), Scalar{}) == r);
}

TEST_CASE("prover state is single use") {
  Rng rng(as_bytes("reuse"));
  auto prover = asset_decl_prove_step1(rng, P());
  (void)prover.respond_asset(Scalar::one(), Scalar::one());
  CHECK_THROWS_AS(prover.respond_asset(Scalar::one(), Scalar::one()), NonceReuse);

  auto addr = address_audit_prove_step1(rng, P());
  auto moved = std::move(addr);
  CHECK_THROWS_AS(addr.respond_address(Scalar::one(), Scalar{}, Scalar{}), NonceReuse);
  (void)moved.respond_address(Scalar::one(), Scalar{}, Scalar{});
  CHECK_THROWS_AS(moved.respond_address(Scalar::one(), Scalar{}, Scalar{}), NonceReuse);

  auto wrong = asset_decl_prove_step1(rng, P());
  CHECK_THROWS_AS(wrong.respond_address(Scalar::one(), Scalar{}, Scalar{}), UnknownProtocol);
}

TEST_CASE("asset declaration verify") {
  Rng rng(as_bytes("asset-verify"));
  auto inst = make_instance(rng, {true, false, true, true});
  auto stmt = inst.asset_statement();
  const auto v = inst.assets.witness.blinder_sum();

  CHECK(asset_decl_verify(stmt, run_asset(asset_decl_prove_step1(rng, P()), Scalar::random(rng), v), P()));

  SUBCASE("zero challenge accepts theta = r regardless of v") {
    auto prover = asset_decl_prove_step1(rng, P());
    auto t = run_asset(std::move(prover), Scalar{}, Scalar::random(rng));
    CHECK(asset_decl_verify(stmt, t, P()));
    auto bogus = stmt;
    bogus.theta += 1;
    CHECK(asset_decl_verify(bogus, t, P()));
  }

  SUBCASE("overstated total is rejected") {
    int accepted = 0;
    for (int i = 0; i < 1000; ++i) {
      auto t = run_asset(asset_decl_prove_step1(rng, P()), nonzero_challenge(rng), v);
      auto lie = stmt;
      lie.theta += 1;
      accepted += asset_decl_verify(lie, t, P());
    }
    CHECK(accepted == 0);
  }

  SUBCASE("wrong arity is rejected") {
    auto t = run_asset(asset_decl_prove_step1(rng, P()), Scalar::random(rng), v);
    t.response.push_back(Scalar{});
    CHECK_FALSE(asset_decl_verify(stmt, t, P()));
  }
}

TEST_CASE("address audit first message and response") {
  Rng a(as_bytes("addr-step1")), b(as_bytes("addr-step1"));
  auto pa = address_audit_prove_step1(a, P());
  auto pb = address_audit_prove_step1(b, P());
  CHECK(pa.commitment() == pb.commitment());
  CHECK(pa.commitment()[0] == P().h * pa.nonces_for_testing()[0]);
  CHECK(pa.commitment()[1] == P().h * pa.nonces_for_testing()[1]);

  auto zero = SigmaProver::with_nonces_for_testing(ProtocolId::kAddressAudit, {Scalar{}, Scalar{}}, P());
  CHECK(zero.commitment()[0].is_identity());
  CHECK(zero.commitment()[1].is_identity());

  auto r = pa.nonces_for_testing();
  auto c = Scalar::random(a), t = Scalar::random(a), v = Scalar::random(a);
  auto theta = pa.respond_address(c, t, v);
  CHECK(theta[0] - r[0] == c * t);
  CHECK(theta[1] - r[1] == c * v);

  r = pb.nonces_for_testing();
  CHECK(pb.respond_address(Scalar{}, t, v) == r);
  auto pc = address_audit_prove_step1(a, P());
  r = pc.nonces_for_testing();
  CHECK(pc.respond_address(c, Scalar{}, Scalar{}) == r);
}

TEST_CASE("address audit verify") {
  Rng rng(as_bytes("address-verify"));
  auto inst = make_instance(rng, {true, false, true, false, false});

  CHECK(address_audit_verify(inst.address_statement(1),
                             run_address(address_audit_prove_step1(rng, P()), Scalar::random(rng),
                                         inst.address_witness(1)),
                             P()));

  SUBCASE("targeting an unowned entry with its real blinders fails") {
    int accepted = 0;
    for (int i = 0; i < 1000; ++i) {
      const std::uint32_t j = (i % 2 == 0) ? 2 : 4;
      auto t = run_address(address_audit_prove_step1(rng, P()), nonzero_challenge(rng), inst.address_witness(j));
      accepted += address_audit_verify(inst.address_statement(j), t, P());
    }
    CHECK(accepted == 0);
  }

  SUBCASE("balance off by one fails") {
    int accepted = 0;
    for (int i = 0; i < 1000; ++i) {
      auto t = run_address(address_audit_prove_step1(rng, P()), nonzero_challenge(rng), inst.address_witness(3));
      auto stmt = inst.address_statement(3);
      stmt.bal += (i % 2 == 0) ? 1 : -1;
      accepted += address_audit_verify(stmt, t, P());
    }
    CHECK(accepted == 0);
  }

  SUBCASE("out-of-range index") {
    CHECK_THROWS_AS(inst.address_statement(0), InvalidArgument);
    CHECK_THROWS_AS(inst.address_statement(6), InvalidArgument);
  }
}

TEST_CASE("fiat-shamir prove and verify") {
  Rng rng(as_bytes("fs"));
  auto inst = make_instance(rng, {true, true, false});
  const Statement asset = inst.asset_statement();
  const Statement address = inst.address_statement(2);
  const Witness asset_w = AssetDeclWitness{inst.assets.witness.blinder_sum()};
  const Witness address_w = inst.address_witness(2);

  auto pa = fiat_shamir_prove(ProtocolId::kAssetDeclaration, asset, asset_w, P(), rng);
  auto pd = fiat_shamir_prove(ProtocolId::kAddressAudit, address, address_w, P(), rng);
  CHECK(fiat_shamir_verify(ProtocolId::kAssetDeclaration, asset, pa, P()));
  CHECK(fiat_shamir_verify(ProtocolId::kAddressAudit, address, pd, P()));
  CHECK_FALSE(fiat_shamir_verify(ProtocolId::kAddressAudit, asset, pa, P()));
  CHECK(pa.encode().size() == 1 + 32 + 32 + 32 + 32);
  CHECK(pd.encode().size() == 1 + 32 + 64 + 32 + 64);

  SUBCASE("deterministic for a fixed seed") {
    Rng r1(as_bytes("fixed")), r2(as_bytes("fixed"));
    CHECK(fiat_shamir_prove(ProtocolId::kAssetDeclaration, asset, asset_w, P(), r1).encode() ==
          fiat_shamir_prove(ProtocolId::kAssetDeclaration, asset, asset_w, P(), r2).encode());
  }

  SUBCASE("unknown or mismatched protocol") {
    CHECK_THROWS_AS(fiat_shamir_prove(static_cast<ProtocolId>(9), asset, asset_w, P(), rng), UnknownProtocol);
    CHECK_THROWS_AS(fiat_shamir_prove(ProtocolId::kAddressAudit, asset, asset_w, P(), rng), UnknownProtocol);
    CHECK_THROWS_AS(fiat_shamir_prove(ProtocolId::kAssetDeclaration, asset, address_w, P(), rng), UnknownProtocol);
    CHECK_FALSE(fiat_shamir_verify(static_cast<ProtocolId>(9), asset, pa, P()));
  }

  SUBCASE("single-byte mutations of the wire proof are rejected") {
    int accepted = 0;
    for (int i = 0; i < 500; ++i) {
      const bool use_asset = i % 2 == 0;
      auto bytes = (use_asset ? pa : pd).encode();
      const auto pos = rng.uniform(bytes.size());
      bytes[pos] ^= static_cast<std::uint8_t>(1 + rng.uniform(255));
      try {
        auto proof = NizkProof::decode(bytes);
        accepted += use_asset ? fiat_shamir_verify(ProtocolId::kAssetDeclaration, asset, proof, P())
                              : fiat_shamir_verify(ProtocolId::kAddressAudit, address, proof, P());
      } catch (const DecodeError&) {
      }
    }
    CHECK(accepted == 0);
  }

  SUBCASE("statement binding: every single-field mutation fails") {
    auto a = std::get<AssetDeclStatement>(asset);
    auto a1 = a;
    a1.theta += 1;
    auto a2 = a;
    a2.z_theta = a.z_theta + P().g;
    CHECK_FALSE(fiat_shamir_verify(ProtocolId::kAssetDeclaration, a1, pa, P()));
    CHECK_FALSE(fiat_shamir_verify(ProtocolId::kAssetDeclaration, a2, pa, P()));

    auto d = std::get<AddressAuditStatement>(address);
    std::vector<AddressAuditStatement> mutants(5, d);
    mutants[0].index = 3;
    mutants[1].y = d.y + P().h;
    mutants[2].l = d.l + P().h;
    mutants[3].p = d.p + P().h;
    mutants[4].bal = d.bal + 1;
    for (const auto& m : mutants) CHECK_FALSE(fiat_shamir_verify(ProtocolId::kAddressAudit, m, pd, P()));
  }

  SUBCASE("text mirror round-trips") {
    CHECK(NizkProof::from_text(pd.to_text()).encode() == pd.encode());
    auto bad = pa.encode();
    bad[0] = 7;
    CHECK_THROWS_AS(NizkProof::decode(bad), DecodeError);
  }
}

TEST_CASE("special soundness extractor") {
  Rng rng(as_bytes("extract"));
  auto inst = make_instance(rng, {false, true, true});
  const auto v = inst.assets.witness.blinder_sum();

  auto r = Scalar::random(rng);
  auto fork = [&](ProtocolId id, std::vector<Scalar> nonces) {
    return SigmaProver::with_nonces_for_testing(id, std::move(nonces), P());
  };
  auto t1 = run_asset(fork(ProtocolId::kAssetDeclaration, {r}), Scalar::from_u64(3), v);
  auto t2 = run_asset(fork(ProtocolId::kAssetDeclaration, {r}), Scalar::from_u64(11), v);
  CHECK(extract_witness(t1, t2) == std::vector<Scalar>{v});

  auto r1 = Scalar::random(rng), r2 = Scalar::random(rng);
  auto w = inst.address_witness(2);
  auto u1 = run_address(fork(ProtocolId::kAddressAudit, {r1, r2}), Scalar::random(rng), w);
  auto u2 = run_address(fork(ProtocolId::kAddressAudit, {r1, r2}), Scalar::random(rng), w);
  CHECK(extract_witness(u1, u2) == std::vector<Scalar>{w.t, w.v});

  CHECK_THROWS_AS(extract_witness(t1, t1), InvalidArgument);
  auto other = run_asset(fork(ProtocolId::kAssetDeclaration, {r + Scalar::one()}), Scalar::from_u64(5), v);
  CHECK_THROWS_AS(extract_witness(t1, other), InvalidArgument);
}

TEST_CASE("HVZK simulator") {
  Rng rng(as_bytes("simulate"));
  auto inst = make_instance(rng, {true, false});
  const Statement asset = inst.asset_statement();
  const Statement address = inst.address_statement(1);
  // Statements nobody could prove honestly are simulatable too.
  auto false_asset = std::get<AssetDeclStatement>(asset);
  false_asset.theta += 1000;
  const Statement unowned = inst.address_statement(2);
  for (const Statement& stmt : {asset, address, Statement{false_asset}, unowned}) {
    for (int i = 0; i < 20; ++i) CHECK(sigma_verify(stmt, simulate_transcript(stmt, Scalar::random(rng), P(), rng), P()));
  }
  Rng a(as_bytes("sim0")), b(as_bytes("sim0"));
  auto t = simulate_transcript(asset, Scalar{}, P(), a);
  CHECK(t.commitment[0] == P().h * t.response[0]);
  CHECK(t == simulate_transcript(asset, Scalar{}, P(), b));
}
