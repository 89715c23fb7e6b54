#include "taxledger/authority.hpp"

#include <json.hpp>

namespace taxledger {

namespace {

[[noreturn]] void fail(AuthorityErrc code, const std::string& detail) { throw AuthorityError(code, detail); }

}  // namespace

std::string_view to_string(AuthorityErrc code) {
  switch (code) {
    case AuthorityErrc::kDuplicateTaxpayer:
      return "DuplicateTaxpayer";
    case AuthorityErrc::kUnknownTaxpayer:
      return "UnknownTaxpayer";
    case AuthorityErrc::kAddressAlreadyCertified:
      return "AddressAlreadyCertified";
  }
  return "Unknown";
}

AuthorityError::AuthorityError(AuthorityErrc code, const std::string& detail)
    : Error(std::string(to_string(code)) + ": " + detail), code_(code) {}

Authority::Authority(AuthorityId id, KeyPair initial) : id_(id), keys_{std::move(initial)} {}

void Authority::register_taxpayer(const TaxpayerId& taxpayer) {
  if (taxpayers_.contains(taxpayer)) fail(AuthorityErrc::kDuplicateTaxpayer, taxpayer);
  taxpayers_.emplace(taxpayer, TaxpayerRecord{taxpayer, std::nullopt, {}});
}

const TaxpayerRecord& Authority::record(const TaxpayerId& taxpayer) const {
  auto it = taxpayers_.find(taxpayer);
  if (it == taxpayers_.end()) fail(AuthorityErrc::kUnknownTaxpayer, taxpayer);
  return it->second;
}

TaxpayerRecord& Authority::mutable_record(const TaxpayerId& taxpayer) {
  auto it = taxpayers_.find(taxpayer);
  if (it == taxpayers_.end()) fail(AuthorityErrc::kUnknownTaxpayer, taxpayer);
  return it->second;
}

std::optional<TaxpayerId> Authority::owner_of(const Address& alpha) const {
  auto it = owners_.find(alpha);
  if (it == owners_.end()) return std::nullopt;
  return it->second;
}

CertifiedAddress Authority::certify_address(const TaxpayerId& taxpayer, const Address& alpha) {
  auto& rec = mutable_record(taxpayer);
  if (auto owner = owner_of(alpha))
    fail(AuthorityErrc::kAddressAlreadyCertified, to_hex(alpha) + " belongs to " + *owner);
  CertifiedAddress cert{alpha, sign(alpha.bytes, current_key().sk), id_};
  rec.certified.push_back(cert);
  owners_.emplace(alpha, taxpayer);
  return cert;
}

std::uint64_t Authority::compute_declared_assets(const TaxpayerId& taxpayer, const BalanceQuery& balance) const {
  std::uint64_t total = 0;
  for (const auto& cert : record(taxpayer).certified) total += balance(cert.alpha);
  return total;
}

std::uint64_t Authority::compute_declared_assets(const TaxpayerId& taxpayer, const LedgerState& ledger) const {
  return compute_declared_assets(taxpayer, [&](const Address& a) { return ledger.balance_of(a); });
}

bool Authority::verify_asset_declaration(const TaxpayerId& taxpayer, std::uint64_t theta,
                                         const AssetCommitments& comms, const NizkProof& proof) {
  auto& rec = mutable_record(taxpayer);
  if (comms.p.empty()) return false;
  const auto& params = setup_group();
  const AssetDeclStatement stmt{aggregate_commitment(comms, params), theta};
  if (!fiat_shamir_verify(ProtocolId::kAssetDeclaration, stmt, proof, params)) return false;
  rec.declared_theta = theta;
  return true;
}

DeclarationSession Authority::open_declaration(const TaxpayerId& taxpayer, std::uint64_t theta,
                                               const AssetCommitments& comms, const GroupElement& lambda,
                                               Rng& rng) const {
  record(taxpayer);
  DeclarationSession s;
  s.taxpayer_ = taxpayer;
  s.statement_ = {aggregate_commitment(comms, setup_group()), theta};
  s.transcript_.commitment = {lambda};
  s.transcript_.challenge = Scalar::random(rng);
  return s;
}

bool Authority::close_declaration(DeclarationSession& session, const Scalar& response) {
  if (session.closed_) throw InvalidArgument("declaration session already closed");
  session.closed_ = true;
  session.transcript_.response = {response};
  if (!asset_decl_verify(session.statement_, session.transcript_, setup_group())) return false;
  mutable_record(session.taxpayer_).declared_theta = session.statement_.theta;
  return true;
}

AuthorityUpdate Authority::rotate_key(KeyPair next) {
  auto update = make_handover(id_, current_key(), next.vk);
  keys_.push_back(std::move(next));
  return update;
}

CheckpointCert Authority::certify_checkpoint(std::uint64_t height, const BlockId& block) const {
  return make_checkpoint(id_, current_key(), height, block);
}

// ---------------------------------------------------------------- snapshot

Bytes Authority::snapshot() const {
  ByteWriter w;
  w.u16(id_).u32(static_cast<std::uint32_t>(keys_.size()));
  for (const auto& kp : keys_) w.raw(kp.sk.to_bytes()).raw(kp.vk.to_bytes());
  w.u32(static_cast<std::uint32_t>(taxpayers_.size()));
  for (const auto& [id, rec] : taxpayers_) {
    w.str(id).u8(rec.declared_theta ? 1 : 0).u64(rec.declared_theta.value_or(0));
    w.u32(static_cast<std::uint32_t>(rec.certified.size()));
    for (const auto& c : rec.certified) w.raw(c.alpha.bytes).raw(c.sigma.bytes).u16(c.authority);
  }
  return std::move(w).bytes();
}

Authority Authority::restore(ByteView bytes) {
  ByteReader r(bytes);
  const auto id = r.u16();
  std::vector<KeyPair> keys;
  for (auto n = r.u32(); n > 0; --n) {
    KeyPair kp;
    kp.sk = Scalar::from_bytes(r.raw(kScalarBytes));
    kp.vk = GroupElement::from_bytes(r.raw(kElementBytes));
    if (GroupElement::base_mul(kp.sk) != kp.vk) throw DecodeError("snapshot key pair is inconsistent");
    keys.push_back(kp);
  }
  if (keys.empty()) throw DecodeError("snapshot has no keys");
  Authority a(id, keys.front());
  a.keys_ = std::move(keys);
  for (auto n = r.u32(); n > 0; --n) {
    TaxpayerRecord rec;
    rec.id = r.str();
    const bool has_theta = r.u8() != 0;
    const auto theta = r.u64();
    if (has_theta) rec.declared_theta = theta;
    for (auto k = r.u32(); k > 0; --k) {
      CertifiedAddress c;
      c.alpha = Address::from_bytes(r.raw(kAddressBytes));
      c.sigma = Signature::from_bytes(r.raw(kSignatureBytes));
      c.authority = r.u16();
      if (!a.owners_.emplace(c.alpha, rec.id).second) throw DecodeError("address certified twice in snapshot");
      rec.certified.push_back(c);
    }
    if (!a.taxpayers_.emplace(rec.id, rec).second) throw DecodeError("duplicate taxpayer in snapshot");
  }
  r.expect_end();
  return a;
}

std::string Authority::snapshot_text() const {
  using json = nlohmann::json;
  json keys = json::array();
  for (const auto& kp : keys_) keys.push_back({{"sk", to_hex(kp.sk)}, {"vk", to_hex(kp.vk)}});
  json taxpayers = json::object();
  for (const auto& [id, rec] : taxpayers_) {
    json certs = json::array();
    for (const auto& c : rec.certified)
      certs.push_back({{"alpha", to_hex(c.alpha)}, {"sigma", to_hex(c.sigma.bytes)}, {"authority", c.authority}});
    taxpayers[id] = {{"declared_theta", rec.declared_theta ? json(*rec.declared_theta) : json(nullptr)},
                     {"certified", certs}};
  }
  return json{{"authority", id_}, {"keys", keys}, {"taxpayers", taxpayers}}.dump(2) + "\n";
}

}  // namespace taxledger
