#include "taxledger/ledger.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include <json.hpp>

namespace taxledger {

namespace {

using json = nlohmann::json;

constexpr std::array<std::pair<LedgerErrc, std::string_view>, 15> kErrcNames = {{
    {LedgerErrc::kInsufficientBalance, "InsufficientBalance"},
    {LedgerErrc::kBadAuthSignature, "BadAuthSignature"},
    {LedgerErrc::kFrozenSource, "FrozenSource"},
    {LedgerErrc::kBadCertification, "BadCertification"},
    {LedgerErrc::kZeroAmount, "ZeroAmount"},
    {LedgerErrc::kBadNonce, "BadNonce"},
    {LedgerErrc::kHeightMismatch, "HeightMismatch"},
    {LedgerErrc::kParentMismatch, "ParentMismatch"},
    {LedgerErrc::kBadHandover, "BadHandover"},
    {LedgerErrc::kUnknownAuthority, "UnknownAuthority"},
    {LedgerErrc::kNotAuditHeight, "NotAuditHeight"},
    {LedgerErrc::kBadCheckpointSig, "BadCheckpointSig"},
    {LedgerErrc::kConflictingCheckpoint, "ConflictingCheckpoint"},
    {LedgerErrc::kCheckpointViolation, "CheckpointViolation"},
    {LedgerErrc::kNoCompliantChain, "NoCompliantChain"},
}};

[[noreturn]] void fail(LedgerErrc code, const std::string& detail) { throw LedgerError(code, detail); }

constexpr std::uint8_t kDestPlain = 0;
constexpr std::uint8_t kDestCertified = 1;

void write_destination(ByteWriter& w, const Destination& d) {
  if (const auto* plain = std::get_if<Address>(&d)) {
    w.u8(kDestPlain).raw(plain->bytes);
  } else {
    const auto& cert = std::get<CertifiedAddress>(d);
    w.u8(kDestCertified).raw(cert.alpha.bytes).raw(cert.sigma.bytes).u16(cert.authority);
  }
}

Destination read_destination(ByteReader& r) {
  const auto kind = r.u8();
  if (kind == kDestPlain) return Address::from_bytes(r.raw(kAddressBytes));
  if (kind != kDestCertified) throw DecodeError("unknown destination kind");
  CertifiedAddress cert;
  cert.alpha = Address::from_bytes(r.raw(kAddressBytes));
  cert.sigma = Signature::from_bytes(r.raw(kSignatureBytes));
  cert.authority = r.u16();
  return cert;
}

void write_tx(ByteWriter& w, const Transaction& tx) {
  w.raw(tx.source_vk.to_bytes()).raw(tx.source.bytes);
  write_destination(w, tx.destination);
  w.u64(tx.amount).u64(tx.nonce).raw(tx.auth.bytes);
}

Transaction read_tx(ByteReader& r) {
  Transaction tx;
  tx.source_vk = GroupElement::from_bytes(r.raw(kElementBytes));
  tx.source = Address::from_bytes(r.raw(kAddressBytes));
  tx.destination = read_destination(r);
  tx.amount = r.u64();
  tx.nonce = r.u64();
  tx.auth = Signature::from_bytes(r.raw(kSignatureBytes));
  return tx;
}

std::uint32_t count(std::size_t n) { return static_cast<std::uint32_t>(n); }

}  // namespace

std::string_view to_string(LedgerErrc code) {
  for (const auto& [c, name] : kErrcNames)
    if (c == code) return name;
  return "Unknown";
}

std::optional<LedgerErrc> ledger_errc_from_string(std::string_view name) {
  for (const auto& [c, n] : kErrcNames)
    if (n == name) return c;
  return std::nullopt;
}

LedgerError::LedgerError(LedgerErrc code, const std::string& detail)
    : Error(std::string(to_string(code)) + ": " + detail), code_(code) {}

bool is_tax_audit_height(std::uint64_t h, const TaxPeriodConfig& cfg) {
  if (cfg.period_blocks == 0) throw InvalidArgument("period_blocks must be at least 1");
  return h > 0 && h % cfg.period_blocks == 0;
}

const Address& destination_address(const Destination& d) {
  if (const auto* plain = std::get_if<Address>(&d)) return *plain;
  return std::get<CertifiedAddress>(d).alpha;
}

// ------------------------------------------------------------ transactions

Bytes Transaction::signing_bytes() const {
  ByteWriter w;
  w.str("TAXP/tx/v1").raw(source.bytes);
  write_destination(w, destination);
  w.u64(amount).u64(nonce);
  return std::move(w).bytes();
}

Transaction make_transaction(const KeyPair& from, Destination to, std::uint64_t amount, std::uint64_t nonce) {
  Transaction tx;
  tx.source_vk = from.vk;
  tx.source = hash_to_address(from.vk);
  tx.destination = std::move(to);
  tx.amount = amount;
  tx.nonce = nonce;
  tx.auth = sign(tx.signing_bytes(), from.sk);
  return tx;
}

Bytes handover_message(AuthorityId authority, const GroupElement& new_vk) {
  ByteWriter w;
  w.str("TAXP/rotate/v1").u16(authority).raw(new_vk.to_bytes());
  return std::move(w).bytes();
}

AuthorityUpdate make_handover(AuthorityId authority, const KeyPair& current, const GroupElement& new_vk) {
  return {authority, new_vk, sign(handover_message(authority, new_vk), current.sk)};
}

Bytes checkpoint_message(std::uint64_t height, const BlockId& block) {
  ByteWriter w;
  w.str("TAXP/ckpt/v1").u64(height).raw(block);
  return std::move(w).bytes();
}

CheckpointCert make_checkpoint(AuthorityId authority, const KeyPair& current, std::uint64_t height,
                               const BlockId& block) {
  return {authority, height, block, sign(checkpoint_message(height, block), current.sk)};
}

// ------------------------------------------------------------------ blocks

Bytes Block::encode() const {
  ByteWriter w;
  w.u64(height).raw(parent).u32(count(txs.size()));
  for (const auto& tx : txs) write_tx(w, tx);
  w.u8(authority_update ? 1 : 0);
  if (authority_update)
    w.u16(authority_update->authority).raw(authority_update->new_vk.to_bytes()).raw(authority_update->handover.bytes);
  w.u8(checkpoint ? 1 : 0);
  if (checkpoint) w.u16(checkpoint->authority).u64(checkpoint->height).raw(checkpoint->block).raw(checkpoint->sig.bytes);
  return std::move(w).bytes();
}

Block Block::decode(ByteView bytes) {
  ByteReader r(bytes);
  Block b;
  b.height = r.u64();
  b.parent = r.fixed<32>();
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) b.txs.push_back(read_tx(r));
  if (r.u8() != 0) {
    AuthorityUpdate u;
    u.authority = r.u16();
    u.new_vk = GroupElement::from_bytes(r.raw(kElementBytes));
    u.handover = Signature::from_bytes(r.raw(kSignatureBytes));
    b.authority_update = u;
  }
  if (r.u8() != 0) {
    CheckpointCert c;
    c.authority = r.u16();
    c.height = r.u64();
    c.block = r.fixed<32>();
    c.sig = Signature::from_bytes(r.raw(kSignatureBytes));
    b.checkpoint = c;
  }
  r.expect_end();
  return b;
}

BlockId Block::id() const { return tagged_hash("TAXP/block/v1", encode()); }

// ------------------------------------------------------------------- state

std::string_view to_string(FreezeStatus s) { return s == FreezeStatus::kFrozen ? "Frozen" : "Liquid"; }

std::uint64_t LedgerState::balance_of(const Address& a) const {
  auto it = balances.find(a);
  return it == balances.end() ? 0 : it->second;
}

std::uint64_t LedgerState::next_nonce(const Address& a) const {
  auto it = nonces.find(a);
  return it == nonces.end() ? 0 : it->second;
}

const GroupElement& LedgerState::current_key(AuthorityId id) const {
  auto it = authority_keys.find(id);
  if (it == authority_keys.end() || it->second.empty())
    fail(LedgerErrc::kUnknownAuthority, "authority " + std::to_string(id));
  return it->second.back();
}

std::uint64_t LedgerState::total_supply() const {
  std::uint64_t total = 0;
  for (const auto& [addr, bal] : balances) total += bal;
  return total;
}

Bytes LedgerState::encode() const {
  ByteWriter w;
  w.u64(height).raw(tip);
  w.u32(count(balances.size()));
  for (const auto& [a, bal] : balances) w.raw(a.bytes).u64(bal);
  w.u32(count(nonces.size()));
  for (const auto& [a, n] : nonces) w.raw(a.bytes).u64(n);
  w.u32(count(certified.size()));
  for (const auto& a : certified) w.raw(a.bytes);
  w.u32(count(authority_keys.size()));
  for (const auto& [id, chain] : authority_keys) {
    w.u16(id).u32(count(chain.size()));
    for (const auto& vk : chain) w.raw(vk.to_bytes());
  }
  w.u32(count(checkpoints.size()));
  for (const auto& [h, id] : checkpoints) w.u64(h).raw(id);
  w.u64(last_audit_height);
  w.u32(count(frozen_at_audit.size()));
  for (const auto& a : frozen_at_audit) w.raw(a.bytes);
  return std::move(w).bytes();
}

LedgerState LedgerState::decode(ByteView bytes) {
  ByteReader r(bytes);
  LedgerState s;
  auto address = [&] { return Address::from_bytes(r.raw(kAddressBytes)); };
  s.height = r.u64();
  s.tip = r.fixed<32>();
  for (auto n = r.u32(); n > 0; --n) {
    auto a = address();
    s.balances[a] = r.u64();
  }
  for (auto n = r.u32(); n > 0; --n) {
    auto a = address();
    s.nonces[a] = r.u64();
  }
  for (auto n = r.u32(); n > 0; --n) s.certified.insert(address());
  for (auto n = r.u32(); n > 0; --n) {
    auto id = r.u16();
    auto& chain = s.authority_keys[id];
    for (auto k = r.u32(); k > 0; --k) chain.push_back(GroupElement::from_bytes(r.raw(kElementBytes)));
  }
  for (auto n = r.u32(); n > 0; --n) {
    auto h = r.u64();
    s.checkpoints[h] = r.fixed<32>();
  }
  s.last_audit_height = r.u64();
  for (auto n = r.u32(); n > 0; --n) s.frozen_at_audit.insert(address());
  r.expect_end();
  return s;
}

std::string LedgerState::to_text() const {
  json bal = json::object();
  for (const auto& [a, v] : balances) bal[to_hex(a)] = v;
  json nonce = json::object();
  for (const auto& [a, v] : nonces) nonce[to_hex(a)] = v;
  json cert = json::array();
  for (const auto& a : certified) cert.push_back(to_hex(a));
  json keys = json::object();
  for (const auto& [id, chain] : authority_keys) {
    json c = json::array();
    for (const auto& vk : chain) c.push_back(to_hex(vk));
    keys[std::to_string(id)] = c;
  }
  json ckpt = json::object();
  for (const auto& [h, id] : checkpoints) ckpt[std::to_string(h)] = to_hex(id);
  json frozen = json::array();
  for (const auto& a : frozen_at_audit) frozen.push_back(to_hex(a));
  return json{{"height", height},
              {"tip", to_hex(tip)},
              {"balances", bal},
              {"nonces", nonce},
              {"certified", cert},
              {"authority_keys", keys},
              {"checkpoints", ckpt},
              {"last_audit_height", last_audit_height},
              {"frozen_at_audit", frozen}}
             .dump(2) +
         "\n";
}

LedgerState LedgerState::from_text(std::string_view text) {
  const auto digest_of = [](const json& j) {
    const auto raw = from_hex(j.get<std::string>());
    if (raw.size() != Digest{}.size()) throw DecodeError("digest must be 32 bytes");
    Digest d;
    std::copy(raw.begin(), raw.end(), d.begin());
    return d;
  };
  const auto address_of = [](const std::string& hex) { return Address::from_bytes(from_hex(hex)); };
  try {
    const auto doc = json::parse(text);
    LedgerState s;
    s.height = doc.at("height").get<std::uint64_t>();
    s.tip = digest_of(doc.at("tip"));
    for (const auto& [a, v] : doc.at("balances").items()) s.balances[address_of(a)] = v.get<std::uint64_t>();
    for (const auto& [a, v] : doc.at("nonces").items()) s.nonces[address_of(a)] = v.get<std::uint64_t>();
    for (const auto& a : doc.at("certified")) s.certified.insert(address_of(a.get<std::string>()));
    for (const auto& [id, chain] : doc.at("authority_keys").items()) {
      auto& keys = s.authority_keys[static_cast<AuthorityId>(std::stoul(id))];
      for (const auto& vk : chain) keys.push_back(GroupElement::from_bytes(from_hex(vk.get<std::string>())));
    }
    for (const auto& [h, id] : doc.at("checkpoints").items()) s.checkpoints[std::stoull(h)] = digest_of(id);
    s.last_audit_height = doc.at("last_audit_height").get<std::uint64_t>();
    for (const auto& a : doc.at("frozen_at_audit")) s.frozen_at_audit.insert(address_of(a.get<std::string>()));
    // The binary decoder owns the structural checks.
    return decode(s.encode());
  } catch (const json::exception& e) {
    throw DecodeError(std::string("ledger state text: ") + e.what());
  } catch (const std::logic_error& e) {
    throw DecodeError(std::string("ledger state text: ") + e.what());
  }
}

LedgerState genesis(const GenesisConfig& cfg) {
  LedgerState s;
  for (const auto& [id, vk] : cfg.authorities) s.authority_keys[id] = {vk};
  for (const auto& [addr, bal] : cfg.allocations)
    if (bal > 0) s.balances[addr] = bal;
  s.tip = tagged_hash("TAXP/genesis/v1", s.encode());
  return s;
}

// ------------------------------------------------------------------- rules

bool certification_valid(const LedgerState& state, const CertifiedAddress& cert) {
  auto it = state.authority_keys.find(cert.authority);
  if (it == state.authority_keys.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(),
                     [&](const GroupElement& vk) { return verify(cert.alpha.bytes, cert.sigma, vk); });
}

FreezeStatus freeze_status(const LedgerState& state, const Address& addr) {
  const bool frozen = state.last_audit_height > 0 && state.height >= state.last_audit_height &&
                      !state.certified.contains(addr) && state.frozen_at_audit.contains(addr);
  return frozen ? FreezeStatus::kFrozen : FreezeStatus::kLiquid;
}

LedgerState apply_transaction(const LedgerState& state, const Transaction& tx) {
  if (tx.amount == 0) fail(LedgerErrc::kZeroAmount, "amount must be positive");
  if (hash_to_address(tx.source_vk) != tx.source) fail(LedgerErrc::kBadAuthSignature, "key does not hash to source");
  if (!verify(tx.signing_bytes(), tx.auth, tx.source_vk))
    fail(LedgerErrc::kBadAuthSignature, "authorization signature invalid");
  const auto expected = state.next_nonce(tx.source);
  if (tx.nonce != expected)
    fail(LedgerErrc::kBadNonce, "expected nonce " + std::to_string(expected) + ", got " + std::to_string(tx.nonce));
  const auto balance = state.balance_of(tx.source);
  if (balance < tx.amount)
    fail(LedgerErrc::kInsufficientBalance,
         "balance " + std::to_string(balance) + " < amount " + std::to_string(tx.amount));
  const auto* cert = std::get_if<CertifiedAddress>(&tx.destination);
  if (cert != nullptr && !certification_valid(state, *cert))
    fail(LedgerErrc::kBadCertification, "certification of " + to_hex(cert->alpha) + " does not verify");
  if (cert == nullptr && freeze_status(state, tx.source) == FreezeStatus::kFrozen)
    fail(LedgerErrc::kFrozenSource, "frozen funds may only move to a certified address");

  LedgerState next = state;
  const auto& dest = destination_address(tx.destination);
  if (balance == tx.amount)
    next.balances.erase(tx.source);
  else
    next.balances[tx.source] = balance - tx.amount;
  next.balances[dest] += tx.amount;
  next.nonces[tx.source] = expected + 1;
  if (cert != nullptr) next.certified.insert(cert->alpha);
  return next;
}

LedgerState rotate_authority_key(const LedgerState& state, const AuthorityUpdate& update) {
  auto it = state.authority_keys.find(update.authority);
  if (it == state.authority_keys.end() || it->second.empty())
    fail(LedgerErrc::kBadHandover, "unknown authority " + std::to_string(update.authority));
  if (!verify(handover_message(update.authority, update.new_vk), update.handover, it->second.back()))
    fail(LedgerErrc::kBadHandover, "handover not signed by the current key");
  LedgerState next = state;
  next.authority_keys[update.authority].push_back(update.new_vk);
  return next;
}

LedgerState certify_checkpoint(const LedgerState& state, const CheckpointCert& cert, const TaxPeriodConfig& cfg) {
  if (!is_tax_audit_height(cert.height, cfg))
    fail(LedgerErrc::kNotAuditHeight, "height " + std::to_string(cert.height) + " is not a tax-auditing height");
  auto it = state.authority_keys.find(cert.authority);
  if (it == state.authority_keys.end() || it->second.empty() ||
      !verify(checkpoint_message(cert.height, cert.block), cert.sig, it->second.back()))
    fail(LedgerErrc::kBadCheckpointSig, "checkpoint not signed by a current authority key");
  if (auto existing = state.checkpoints.find(cert.height); existing != state.checkpoints.end()) {
    if (existing->second != cert.block)
      fail(LedgerErrc::kConflictingCheckpoint, "height " + std::to_string(cert.height) + " already checkpointed");
    return state;
  }
  LedgerState next = state;
  next.checkpoints.emplace(cert.height, cert.block);
  return next;
}

LedgerState apply_block(const LedgerState& state, const Block& block, const TaxPeriodConfig& cfg) {
  if (block.height != state.height + 1)
    fail(LedgerErrc::kHeightMismatch,
         "block height " + std::to_string(block.height) + " after " + std::to_string(state.height));
  if (block.parent != state.tip) fail(LedgerErrc::kParentMismatch, "block does not extend the current tip");
  const auto id = block.id();
  if (auto it = state.checkpoints.find(block.height); it != state.checkpoints.end() && it->second != id)
    fail(LedgerErrc::kCheckpointViolation, "block conflicts with checkpoint at " + std::to_string(block.height));

  LedgerState next = state;
  if (block.authority_update) next = rotate_authority_key(next, *block.authority_update);
  for (const auto& tx : block.txs) next = apply_transaction(next, tx);
  if (block.checkpoint) next = certify_checkpoint(next, *block.checkpoint, cfg);

  next.height = block.height;
  next.tip = id;
  if (is_tax_audit_height(block.height, cfg)) {
    next.last_audit_height = block.height;
    next.frozen_at_audit.clear();
    for (const auto& [addr, bal] : next.balances)
      if (bal > 0 && !next.certified.contains(addr)) next.frozen_at_audit.insert(addr);
  }
  return next;
}

// ------------------------------------------------------------- fork choice

namespace {

bool chain_compliant(const Chain& chain, const std::map<std::uint64_t, BlockId>& checkpoints) {
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (chain[i].height != i + 1) return false;
    if (i > 0 && chain[i].parent != chain[i - 1].id()) return false;
  }
  for (const auto& [h, id] : checkpoints) {
    if (h == 0 || h > chain.size() || chain[h - 1].id() != id) return false;
  }
  return true;
}

BlockId tip_id(const Chain& chain) { return chain.empty() ? BlockId{} : chain.back().id(); }

}  // namespace

const Chain& fork_choice(std::span<const Chain> candidates, const std::map<std::uint64_t, BlockId>& checkpoints) {
  const Chain* best = nullptr;
  for (const auto& chain : candidates) {
    if (!chain_compliant(chain, checkpoints)) continue;
    if (best == nullptr || chain.size() > best->size() ||
        (chain.size() == best->size() && tip_id(chain) < tip_id(*best)))
      best = &chain;
  }
  if (best == nullptr) fail(LedgerErrc::kNoCompliantChain, "no candidate contains every checkpointed block");
  return *best;
}

}  // namespace taxledger
