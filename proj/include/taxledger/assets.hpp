#pragma once

// Proof-of-assets commitments over a public anonymity set of keys:
//   b_i = g^bal_i                      (binding, not hiding)
//   p_i = b_i^s_i * h^v_i              (commits to s_i * bal_i)
//   l_i = y_i^s_i * h^t_i              (commits to x_i * s_i)
//   Z   = prod p_i = g^Theta * h^(sum v_i)

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "taxledger/crypto.hpp"

namespace taxledger {

/// Per-address balance bound; keeps sums of balances far from q.
inline constexpr std::uint64_t kMaxBalance = std::uint64_t{1} << 62;

class WitnessIncomplete : public Error {
 public:
  using Error::Error;
};

struct AnonymitySet {
  std::vector<GroupElement> keys;
  std::vector<std::uint64_t> balances;

  std::size_t size() const { return keys.size(); }
  /// Throws ShapeError / InvalidArgument when the invariants are violated.
  void validate() const;
};

struct AssetWitness {
  std::vector<bool> owned;                  // s_i
  std::map<std::size_t, Scalar> private_keys;  // x_i, exactly where s_i = 1
  std::vector<Scalar> blinders_v;
  std::vector<Scalar> blinders_t;

  /// x_i * s_i; zero where the key is not owned.
  Scalar masked_key(std::size_t i) const;
  Scalar blinder_sum() const;
};

struct AssetCommitments {
  std::vector<GroupElement> p;
  std::vector<GroupElement> l;

  std::size_t size() const { return p.size(); }
};

/// b = g^bal. Throws InvalidArgument for balances at or above kMaxBalance.
GroupElement balance_commitment(std::uint64_t bal, const GroupParams& params);

/// Exact Theta = sum s_i * bal_i. Throws ShapeError on length mismatch.
std::uint64_t total_assets(const AnonymitySet& set, const AssetWitness& wit);

/// Builds (p_i, l_i) for every key. Throws ShapeError on mismatched lengths
/// and WitnessIncomplete when an owned key has no (or a wrong) private key.
AssetCommitments build_asset_commitments(const AnonymitySet& set, const AssetWitness& wit,
                                         const GroupParams& params);

/// Z = prod p_i. Throws ShapeError for an empty commitment list.
GroupElement aggregate_commitment(const AssetCommitments& comms, const GroupParams& params);

/// Random witness for tests and demos: owned keys get fresh private keys,
/// the remaining keys are random group elements, blinders are uniform.
struct GeneratedAssets {
  AnonymitySet set;
  AssetWitness witness;
};
GeneratedAssets generate_assets(std::size_t n, const std::vector<bool>& owned,
                                const std::vector<std::uint64_t>& balances, Rng& rng,
                                const GroupParams& params);

// Commitment-set file. Binary layout, all integers big-endian:
//   u32 n, then n records of  y_i(32) || bal_i(u64) || p_i(32) || l_i(32)
// The text mirror is a JSON document with the same fields in hex.
struct CommitmentSet {
  AnonymitySet set;
  AssetCommitments comms;

  Bytes encode() const;
  static CommitmentSet decode(ByteView bytes);
  std::string to_text() const;
  static CommitmentSet from_text(std::string_view text);
};

/// Prover-private witness file (JSON). Never handed to a verifier.
std::string witness_to_text(const AssetWitness& wit);
AssetWitness witness_from_text(std::string_view text);

}  // namespace taxledger
