#include "taxledger/assets.hpp"

#include <json.hpp>

namespace taxledger {

namespace {

using json = nlohmann::json;

// Totals stay below 2^63 so Theta is an exact u64 and nowhere near q/2.
constexpr std::uint64_t kMaxTotal = std::uint64_t{1} << 63;

void check_witness_shape(const AnonymitySet& set, const AssetWitness& wit) {
  const auto n = set.size();
  if (wit.owned.size() != n || wit.blinders_v.size() != n || wit.blinders_t.size() != n)
    throw ShapeError("witness length does not match anonymity set");
}

GroupElement element_from_hex(const json& j) { return GroupElement::from_bytes(from_hex(j.get<std::string>())); }
Scalar scalar_from_hex(const json& j) { return Scalar::from_bytes(from_hex(j.get<std::string>())); }

}  // namespace

void AnonymitySet::validate() const {
  if (keys.empty()) throw ShapeError("anonymity set must contain at least one key");
  if (keys.size() != balances.size()) throw ShapeError("keys and balances differ in length");
  unsigned __int128 total = 0;
  for (auto bal : balances) {
    if (bal >= kMaxBalance) throw InvalidArgument("balance exceeds 2^62");
    total += bal;
  }
  if (total >= kMaxTotal) throw InvalidArgument("sum of balances exceeds 2^63");
}

Scalar AssetWitness::masked_key(std::size_t i) const {
  if (!owned.at(i)) return {};
  auto it = private_keys.find(i);
  if (it == private_keys.end()) throw WitnessIncomplete("owned key " + std::to_string(i) + " has no private key");
  return it->second;
}

Scalar AssetWitness::blinder_sum() const {
  Scalar sum;
  for (const auto& v : blinders_v) sum += v;
  return sum;
}

GroupElement balance_commitment(std::uint64_t bal, const GroupParams& params) {
  if (bal >= kMaxBalance) throw InvalidArgument("balance exceeds 2^62");
  return params.g * Scalar::from_u64(bal);
}

std::uint64_t total_assets(const AnonymitySet& set, const AssetWitness& wit) {
  if (wit.owned.size() != set.size() || set.balances.size() != set.size())
    throw ShapeError("witness length does not match anonymity set");
  std::uint64_t theta = 0;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (wit.owned[i]) theta += set.balances[i];
  return theta;
}

AssetCommitments build_asset_commitments(const AnonymitySet& set, const AssetWitness& wit,
                                         const GroupParams& params) {
  set.validate();
  check_witness_shape(set, wit);
  AssetCommitments out;
  out.p.reserve(set.size());
  out.l.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& y = set.keys[i];
    const auto hv = params.h * wit.blinders_v[i];
    const auto ht = params.h * wit.blinders_t[i];
    if (wit.owned[i]) {
      const auto x = wit.masked_key(i);
      if (GroupElement::base_mul(x) != y)
        throw WitnessIncomplete("private key " + std::to_string(i) + " does not match y_i");
      out.p.push_back(balance_commitment(set.balances[i], params) + hv);
      out.l.push_back(y + ht);
    } else {
      out.p.push_back(hv);
      out.l.push_back(ht);
    }
  }
  return out;
}

GroupElement aggregate_commitment(const AssetCommitments& comms, const GroupParams&) {
  if (comms.p.empty()) throw ShapeError("empty commitment list");
  GroupElement z;
  for (const auto& p : comms.p) z += p;
  return z;
}

GeneratedAssets generate_assets(std::size_t n, const std::vector<bool>& owned,
                                const std::vector<std::uint64_t>& balances, Rng& rng,
                                const GroupParams& params) {
  if (owned.size() != n || balances.size() != n) throw ShapeError("generate_assets: length mismatch");
  GeneratedAssets out;
  out.witness.owned = owned;
  out.set.balances = balances;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = Scalar::random(rng);
    if (owned[i]) {
      out.witness.private_keys.emplace(i, x);
      out.set.keys.push_back(GroupElement::base_mul(x));
    } else {
      // A key somebody else holds: its discrete log is discarded.
      out.set.keys.push_back(params.h * x + params.g * Scalar::random(rng));
    }
    out.witness.blinders_v.push_back(Scalar::random(rng));
    out.witness.blinders_t.push_back(Scalar::random(rng));
  }
  return out;
}

// ------------------------------------------------------------ file formats

Bytes CommitmentSet::encode() const {
  if (set.size() != comms.p.size() || set.size() != comms.l.size() || set.balances.size() != set.size())
    throw ShapeError("commitment set fields differ in length");
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(set.size()));
  for (std::size_t i = 0; i < set.size(); ++i)
    w.raw(set.keys[i].to_bytes()).u64(set.balances[i]).raw(comms.p[i].to_bytes()).raw(comms.l[i].to_bytes());
  return std::move(w).bytes();
}

CommitmentSet CommitmentSet::decode(ByteView bytes) {
  ByteReader r(bytes);
  const auto n = r.u32();
  if (static_cast<std::uint64_t>(n) * 104 != r.remaining()) throw DecodeError("commitment set length mismatch");
  CommitmentSet out;
  for (std::uint32_t i = 0; i < n; ++i) {
    out.set.keys.push_back(GroupElement::from_bytes(r.raw(32)));
    out.set.balances.push_back(r.u64());
    out.comms.p.push_back(GroupElement::from_bytes(r.raw(32)));
    out.comms.l.push_back(GroupElement::from_bytes(r.raw(32)));
  }
  r.expect_end();
  out.set.validate();
  return out;
}

std::string CommitmentSet::to_text() const {
  json entries = json::array();
  for (std::size_t i = 0; i < set.size(); ++i) {
    entries.push_back({{"y", to_hex(set.keys[i])},
                       {"bal", set.balances[i]},
                       {"p", to_hex(comms.p.at(i))},
                       {"l", to_hex(comms.l.at(i))}});
  }
  return json{{"n", set.size()}, {"entries", entries}}.dump(2) + "\n";
}

CommitmentSet CommitmentSet::from_text(std::string_view text) {
  try {
    const auto doc = json::parse(text);
    CommitmentSet out;
    for (const auto& e : doc.at("entries")) {
      out.set.keys.push_back(element_from_hex(e.at("y")));
      out.set.balances.push_back(e.at("bal").get<std::uint64_t>());
      out.comms.p.push_back(element_from_hex(e.at("p")));
      out.comms.l.push_back(element_from_hex(e.at("l")));
    }
    if (doc.at("n").get<std::size_t>() != out.set.size()) throw DecodeError("entry count mismatch");
    out.set.validate();
    return out;
  } catch (const json::exception& e) {
    throw DecodeError(std::string("commitment set text: ") + e.what());
  }
}

std::string witness_to_text(const AssetWitness& wit) {
  json entries = json::array();
  for (std::size_t i = 0; i < wit.owned.size(); ++i) {
    json e{{"s", wit.owned[i] ? 1 : 0}, {"v", to_hex(wit.blinders_v.at(i))}, {"t", to_hex(wit.blinders_t.at(i))}};
    if (auto it = wit.private_keys.find(i); it != wit.private_keys.end()) e["x"] = to_hex(it->second);
    entries.push_back(std::move(e));
  }
  return json{{"entries", entries}}.dump(2) + "\n";
}

AssetWitness witness_from_text(std::string_view text) {
  try {
    const auto doc = json::parse(text);
    AssetWitness wit;
    std::size_t i = 0;
    for (const auto& e : doc.at("entries")) {
      wit.owned.push_back(e.at("s").get<int>() == 1);
      wit.blinders_v.push_back(scalar_from_hex(e.at("v")));
      wit.blinders_t.push_back(scalar_from_hex(e.at("t")));
      if (e.contains("x")) wit.private_keys.emplace(i, scalar_from_hex(e.at("x")));
      ++i;
    }
    return wit;
  } catch (const json::exception& e) {
    throw DecodeError(std::string("witness text: ") + e.what());
  }
}

}  // namespace taxledger
