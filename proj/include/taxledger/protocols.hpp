#pragma once

// Sigma protocols over the proof-of-assets commitments.
//
// Asset declaration (prover E, verifier T), public Z = prod p_i and Theta:
//   E: r <- Z_q, lambda = h^r          T: c <- Z_q          E: theta = r + c*v
//   T accepts iff h^theta == lambda * (Z * g^-Theta)^c
//
// Address audit (prover E, verifier U), public (y_i, l_i, p_i, bal_i):
//   E: r1, r2 <- Z_q, lambda1 = h^r1, lambda2 = h^r2
//   U: c <- Z_q
//   E: theta1 = r1 + c*t_i, theta2 = r2 + c*v_i
//   U accepts iff h^theta1 == lambda1 * (l_i * y_i^-1)^c
//            and h^theta2 == lambda2 * (p_i * g^-bal_i)^c
//
// Both have a Fiat-Shamir form where c is a hash of the statement and the
// first message.

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "taxledger/assets.hpp"
#include "taxledger/crypto.hpp"

namespace taxledger {

inline constexpr std::string_view kTagFsAsset = "TAXP/fs/asset/v1";
inline constexpr std::string_view kTagFsAddress = "TAXP/fs/address/v1";

enum class ProtocolId : std::uint8_t { kAssetDeclaration = 1, kAddressAudit = 2 };

/// Thrown when a prover state is used a second time.
class NonceReuse : public Error {
 public:
  using Error::Error;
};

class UnknownProtocol : public Error {
 public:
  using Error::Error;
};

struct SigmaTranscript {
  std::vector<GroupElement> commitment;  // lambda, or lambda1, lambda2
  Scalar challenge;
  std::vector<Scalar> response;  // theta, or theta1, theta2

  friend bool operator==(const SigmaTranscript&, const SigmaTranscript&) = default;
};

/// Number of commitment / response slots for a protocol.
std::size_t arity(ProtocolId id);

struct AssetDeclStatement {
  GroupElement z_theta;
  std::uint64_t theta = 0;

  Bytes encode() const;  // Z(32) || u64 Theta
};

struct AssetDeclWitness {
  Scalar v;  // sum of the balance blinders
};

struct AddressAuditStatement {
  std::uint32_t index = 0;  // 1-based position in the commitment set
  GroupElement y;
  GroupElement l;
  GroupElement p;
  std::uint64_t bal = 0;

  Bytes encode() const;  // u32 index || y || l || p || u64 bal

  /// Pulls entry `index` (1-based) out of a published commitment set.
  /// Throws InvalidArgument when the index is out of range.
  static AddressAuditStatement from_set(const CommitmentSet& published, std::uint32_t index);
};

struct AddressAuditWitness {
  Scalar t;
  Scalar v;
};

using Statement = std::variant<AssetDeclStatement, AddressAuditStatement>;
using Witness = std::variant<AssetDeclWitness, AddressAuditWitness>;

/// Single-use prover state holding the first-message nonces. Responding
/// consumes the state; a second response throws NonceReuse.
class SigmaProver {
 public:
  SigmaProver(SigmaProver&&) noexcept;
  SigmaProver& operator=(SigmaProver&&) noexcept;
  SigmaProver(const SigmaProver&) = delete;
  SigmaProver& operator=(const SigmaProver&) = delete;
  ~SigmaProver();

  ProtocolId protocol() const { return protocol_; }
  /// lambda values, in slot order.
  const std::vector<GroupElement>& commitment() const { return commitment_; }

  /// theta = r + c*v.
  Scalar respond_asset(const Scalar& c, const Scalar& v);
  /// [theta1, theta2] = [r1 + c*t, r2 + c*v].
  std::vector<Scalar> respond_address(const Scalar& c, const Scalar& t, const Scalar& v);

  bool consumed() const { return nonces_.empty(); }

  /// Test hooks: builds a prover with caller-chosen nonces, and exposes them.
  static SigmaProver with_nonces_for_testing(ProtocolId id, std::vector<Scalar> nonces,
                                             const GroupParams& params);
  const std::vector<Scalar>& nonces_for_testing() const { return nonces_; }

 private:
  friend SigmaProver asset_decl_prove_step1(Rng&, const GroupParams&);
  friend SigmaProver address_audit_prove_step1(Rng&, const GroupParams&);
  SigmaProver(ProtocolId id, std::vector<Scalar> nonces, const GroupParams& params);
  std::vector<Scalar> take_nonces(ProtocolId expected);

  ProtocolId protocol_;
  std::vector<Scalar> nonces_;
  std::vector<GroupElement> commitment_;
};

SigmaProver asset_decl_prove_step1(Rng& rng, const GroupParams& params);
SigmaProver address_audit_prove_step1(Rng& rng, const GroupParams& params);

/// Literal verifier equation; malformed transcripts (wrong arity) are rejected.
bool asset_decl_verify(const AssetDeclStatement& stmt, const SigmaTranscript& t, const GroupParams& params);
bool address_audit_verify(const AddressAuditStatement& stmt, const SigmaTranscript& t,
                          const GroupParams& params);
bool sigma_verify(const Statement& stmt, const SigmaTranscript& t, const GroupParams& params);

ProtocolId protocol_of(const Statement& stmt);

// NIZK wire format, fixed layout:
//   u8 protocol-id || statement hash (32) || commitments (32 each)
//   || challenge (32) || responses (32 each)
// The statement hash is tagged_hash(domain tag, statement encoding) and the
// challenge is hash_to_scalar(domain tag, statement hash || commitments).
struct NizkProof {
  ProtocolId protocol = ProtocolId::kAssetDeclaration;
  Digest context{};  // statement hash bound into the challenge
  SigmaTranscript transcript;

  Bytes encode() const;
  /// Throws DecodeError (including for unknown protocol ids).
  static NizkProof decode(ByteView bytes);
  std::string to_text() const;
  static NizkProof from_text(std::string_view text);
};

std::string_view domain_tag(ProtocolId id);
Digest statement_hash(const Statement& stmt);
Scalar fiat_shamir_challenge(ProtocolId id, const Digest& context, const std::vector<GroupElement>& commitment);

/// Throws UnknownProtocol when `id` is not a known protocol or does not match
/// the statement / witness alternatives.
NizkProof fiat_shamir_prove(ProtocolId id, const Statement& stmt, const Witness& wit, const GroupParams& params,
                            Rng& rng);
/// False on any mismatch: protocol, statement hash, challenge, or equation.
bool fiat_shamir_verify(ProtocolId id, const Statement& stmt, const NizkProof& proof, const GroupParams& params);

/// Special-soundness extractor: (theta - theta') / (c - c') per slot.
/// Throws InvalidArgument when the commitments differ or the challenges are equal.
std::vector<Scalar> extract_witness(const SigmaTranscript& t1, const SigmaTranscript& t2);

/// HVZK simulator: samples responses first and solves for the commitments.
SigmaTranscript simulate_transcript(const Statement& stmt, const Scalar& c, const GroupParams& params, Rng& rng);

}  // namespace taxledger
