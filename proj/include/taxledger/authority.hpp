#pragma once

// Taxation authority: taxpayer registry, address certification (A_U lists),
// declared-asset accounting from certified balances, and the verifier side of
// the zero-knowledge asset declaration.
//
// The two flows are independent. In the ledger flow the authority only sees
// certified addresses and their balances; in the declaration flow it only sees
// Theta, the published commitments and a proof.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taxledger/assets.hpp"
#include "taxledger/ledger.hpp"
#include "taxledger/protocols.hpp"

namespace taxledger {

using TaxpayerId = std::string;

enum class AuthorityErrc { kDuplicateTaxpayer, kUnknownTaxpayer, kAddressAlreadyCertified };
std::string_view to_string(AuthorityErrc code);

class AuthorityError : public Error {
 public:
  AuthorityError(AuthorityErrc code, const std::string& detail);
  AuthorityErrc code() const { return code_; }

 private:
  AuthorityErrc code_;
};

struct TaxpayerRecord {
  TaxpayerId id;
  std::optional<std::uint64_t> declared_theta;
  std::vector<CertifiedAddress> certified;  // A_U
};

/// Looks up the ledger balance of one address.
using BalanceQuery = std::function<std::uint64_t(const Address&)>;

class Authority;

/// Interactive run of the asset declaration with the authority as verifier.
/// Opened with the prover's first message; the authority draws the challenge.
class DeclarationSession {
 public:
  const Scalar& challenge() const { return transcript_.challenge; }
  const AssetDeclStatement& statement() const { return statement_; }

 private:
  friend class Authority;
  TaxpayerId taxpayer_;
  AssetDeclStatement statement_;
  SigmaTranscript transcript_;
  bool closed_ = false;
};

class Authority {
 public:
  Authority(AuthorityId id, KeyPair initial);

  AuthorityId id() const { return id_; }
  const KeyPair& current_key() const { return keys_.back(); }
  const std::vector<KeyPair>& key_chain() const { return keys_; }

  /// Throws AuthorityError(kDuplicateTaxpayer).
  void register_taxpayer(const TaxpayerId& taxpayer);
  bool is_registered(const TaxpayerId& taxpayer) const { return taxpayers_.contains(taxpayer); }
  /// Throws AuthorityError(kUnknownTaxpayer).
  const TaxpayerRecord& record(const TaxpayerId& taxpayer) const;
  std::optional<TaxpayerId> owner_of(const Address& alpha) const;
  std::size_t taxpayer_count() const { return taxpayers_.size(); }

  /// Signs alpha with the current key and files it under the taxpayer.
  /// Throws kUnknownTaxpayer or kAddressAlreadyCertified.
  CertifiedAddress certify_address(const TaxpayerId& taxpayer, const Address& alpha);

  /// Theta_U: sum of balances over the taxpayer's certified addresses. Only
  /// those addresses are ever passed to `balance`.
  std::uint64_t compute_declared_assets(const TaxpayerId& taxpayer, const BalanceQuery& balance) const;
  std::uint64_t compute_declared_assets(const TaxpayerId& taxpayer, const LedgerState& ledger) const;

  /// Recomputes Z from the published p_i and checks the NIZK against (Z, theta).
  /// Records theta on success. Throws kUnknownTaxpayer.
  bool verify_asset_declaration(const TaxpayerId& taxpayer, std::uint64_t theta, const AssetCommitments& comms,
                                const NizkProof& proof);

  DeclarationSession open_declaration(const TaxpayerId& taxpayer, std::uint64_t theta, const AssetCommitments& comms,
                                      const GroupElement& lambda, Rng& rng) const;
  /// Checks the prover's response; a session can be closed once.
  bool close_declaration(DeclarationSession& session, const Scalar& response);

  /// Replaces the current key; the returned record goes on the ledger.
  AuthorityUpdate rotate_key(KeyPair next);
  CheckpointCert certify_checkpoint(std::uint64_t height, const BlockId& block) const;

  // Snapshot: u16 id || u32 #keys || (sk || vk)* || u32 #taxpayers ||
  // (str id || u8 has_theta || u64 theta || u32 #certs || cert(91)*)*
  Bytes snapshot() const;
  static Authority restore(ByteView bytes);
  std::string snapshot_text() const;

 private:
  TaxpayerRecord& mutable_record(const TaxpayerId& taxpayer);

  AuthorityId id_;
  std::vector<KeyPair> keys_;
  std::map<TaxpayerId, TaxpayerRecord> taxpayers_;
  std::map<Address, TaxpayerId> owners_;
};

}  // namespace taxledger
