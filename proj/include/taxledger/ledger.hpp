#pragma once

// Deterministic account-model ledger with taxation periods.
//
// Every `period_blocks` blocks a tax-auditing block is issued. At that point
// every non-certified address holding a balance freezes: it may only send to
// a certified destination <alpha, sigma>, sigma being a taxation authority's
// signature over alpha. Certified addresses are never frozen. Authorities
// rotate keys by signing the successor key; checkpointed tax-auditing blocks
// pin fork choice.
//
// LedgerState is a value. Every apply_* function returns a new state and
// leaves its input untouched, so a failing block is atomic for free.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "taxledger/crypto.hpp"

namespace taxledger {

using AuthorityId = std::uint16_t;
using BlockId = Digest;

inline constexpr std::uint64_t kDefaultPeriodBlocks = 52560;
inline constexpr std::size_t kCertifiedAddressBytes = kAddressBytes + kSignatureBytes + 2;

enum class LedgerErrc {
  kInsufficientBalance,
  kBadAuthSignature,
  kFrozenSource,
  kBadCertification,
  kZeroAmount,
  kBadNonce,
  kHeightMismatch,
  kParentMismatch,
  kBadHandover,
  kUnknownAuthority,
  kNotAuditHeight,
  kBadCheckpointSig,
  kConflictingCheckpoint,
  kCheckpointViolation,
  kNoCompliantChain,
};

/// CamelCase name used in reports and scenario expectations, e.g. "FrozenSource".
std::string_view to_string(LedgerErrc code);
std::optional<LedgerErrc> ledger_errc_from_string(std::string_view name);

class LedgerError : public Error {
 public:
  LedgerError(LedgerErrc code, const std::string& detail);
  LedgerErrc code() const { return code_; }

 private:
  LedgerErrc code_;
};

struct TaxPeriodConfig {
  std::uint64_t period_blocks = kDefaultPeriodBlocks;
};

/// True iff h > 0 and h is a multiple of the period.
bool is_tax_audit_height(std::uint64_t h, const TaxPeriodConfig& cfg);

/// Wire form: alpha(25) || sigma(64) || u16 authority = 91 bytes.
struct CertifiedAddress {
  Address alpha;
  Signature sigma;
  AuthorityId authority = 0;

  friend bool operator==(const CertifiedAddress&, const CertifiedAddress&) = default;
};

using Destination = std::variant<Address, CertifiedAddress>;
const Address& destination_address(const Destination& d);

struct Transaction {
  GroupElement source_vk;
  Address source;
  Destination destination;
  std::uint64_t amount = 0;
  std::uint64_t nonce = 0;
  Signature auth;

  /// Bytes covered by `auth`: tag || source || destination || amount || nonce.
  Bytes signing_bytes() const;
};

/// Builds and signs a transfer from `from`'s address.
Transaction make_transaction(const KeyPair& from, Destination to, std::uint64_t amount, std::uint64_t nonce);

/// An authority publishing its successor key, signed with its current key.
struct AuthorityUpdate {
  AuthorityId authority = 0;
  GroupElement new_vk;
  Signature handover;
};
Bytes handover_message(AuthorityId authority, const GroupElement& new_vk);
AuthorityUpdate make_handover(AuthorityId authority, const KeyPair& current, const GroupElement& new_vk);

/// An authority's choice among competing blocks at a tax-auditing height.
struct CheckpointCert {
  AuthorityId authority = 0;
  std::uint64_t height = 0;
  BlockId block{};
  Signature sig;
};
Bytes checkpoint_message(std::uint64_t height, const BlockId& block);
CheckpointCert make_checkpoint(AuthorityId authority, const KeyPair& current, std::uint64_t height,
                               const BlockId& block);

struct Block {
  std::uint64_t height = 0;
  BlockId parent{};
  std::vector<Transaction> txs;
  std::optional<AuthorityUpdate> authority_update;
  std::optional<CheckpointCert> checkpoint;

  /// tagged_hash("TAXP/block/v1", encode()).
  BlockId id() const;
  Bytes encode() const;
  static Block decode(ByteView bytes);
};

enum class FreezeStatus { kLiquid, kFrozen };
std::string_view to_string(FreezeStatus s);

struct GenesisConfig {
  std::map<AuthorityId, GroupElement> authorities;
  std::map<Address, std::uint64_t> allocations;
};

struct LedgerState {
  std::uint64_t height = 0;
  BlockId tip{};
  std::map<Address, std::uint64_t> balances;
  std::map<Address, std::uint64_t> nonces;  // next expected nonce per source
  std::set<Address> certified;
  std::map<AuthorityId, std::vector<GroupElement>> authority_keys;  // current key last
  std::map<std::uint64_t, BlockId> checkpoints;
  std::uint64_t last_audit_height = 0;
  std::set<Address> frozen_at_audit;  // non-certified funded addresses at the last audit

  std::uint64_t balance_of(const Address& a) const;
  std::uint64_t next_nonce(const Address& a) const;
  /// Current key of an authority; throws LedgerError(kUnknownAuthority).
  const GroupElement& current_key(AuthorityId id) const;
  std::uint64_t total_supply() const;

  /// Canonical binary, fields in declaration order, maps sorted by key.
  Bytes encode() const;
  static LedgerState decode(ByteView bytes);
  std::string to_text() const;
  static LedgerState from_text(std::string_view text);
  Digest digest() const { return sha256(encode()); }

  friend bool operator==(const LedgerState&, const LedgerState&) = default;
};

LedgerState genesis(const GenesisConfig& cfg);

/// True when sigma verifies under any key the authority has ever held.
bool certification_valid(const LedgerState& state, const CertifiedAddress& cert);

FreezeStatus freeze_status(const LedgerState& state, const Address& addr);

/// Throws LedgerError. Checks, in order: zero amount, signature (including
/// that the key hashes to the source), nonce, balance, certification of a
/// certified destination, freezing.
LedgerState apply_transaction(const LedgerState& state, const Transaction& tx);

/// Applies, in order: authority update, transactions, checkpoint, and the
/// freezing snapshot when the block sits at a tax-auditing height.
LedgerState apply_block(const LedgerState& state, const Block& block, const TaxPeriodConfig& cfg);

LedgerState rotate_authority_key(const LedgerState& state, const AuthorityUpdate& update);

LedgerState certify_checkpoint(const LedgerState& state, const CheckpointCert& cert, const TaxPeriodConfig& cfg);

/// A candidate chain: consecutive blocks starting at height 1.
using Chain = std::vector<Block>;

/// Drops candidates that are malformed or miss a checkpointed block, then
/// picks the longest; ties go to the smaller tip id. Throws
/// LedgerError(kNoCompliantChain) when nothing survives.
const Chain& fork_choice(std::span<const Chain> candidates, const std::map<std::uint64_t, BlockId>& checkpoints);

}  // namespace taxledger
