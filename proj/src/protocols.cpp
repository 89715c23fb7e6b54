#include "taxledger/protocols.hpp"

#include <algorithm>

#include <json.hpp>

namespace taxledger {

namespace {

using json = nlohmann::json;

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

bool well_formed(const SigmaTranscript& t, std::size_t k) {
  return t.commitment.size() == k && t.response.size() == k;
}

// The point whose h-discrete-log is the witness: Z * g^-Theta for the asset
// declaration, (l * y^-1, p * g^-bal) for the address audit.
std::vector<GroupElement> statement_targets(const Statement& stmt, const GroupParams& params) {
  return std::visit(
      Overloaded{
          [&](const AssetDeclStatement& s) {
            return std::vector<GroupElement>{s.z_theta - params.g * Scalar::from_u64(s.theta)};
          },
          [&](const AddressAuditStatement& s) {
            return std::vector<GroupElement>{s.l - s.y, s.p - params.g * Scalar::from_u64(s.bal)};
          },
      },
      stmt);
}

// h^theta_k == lambda_k * target_k^c for every slot.
bool check_slots(const std::vector<GroupElement>& targets, const SigmaTranscript& t, const GroupParams& params) {
  if (!well_formed(t, targets.size())) return false;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (params.h * t.response[k] != t.commitment[k] + targets[k] * t.challenge) return false;
  }
  return true;
}

}  // namespace

std::size_t arity(ProtocolId id) {
  switch (id) {
    case ProtocolId::kAssetDeclaration:
      return 1;
    case ProtocolId::kAddressAudit:
      return 2;
  }
  throw UnknownProtocol("unknown protocol id " + std::to_string(static_cast<int>(id)));
}

std::string_view domain_tag(ProtocolId id) {
  switch (id) {
    case ProtocolId::kAssetDeclaration:
      return kTagFsAsset;
    case ProtocolId::kAddressAudit:
      return kTagFsAddress;
  }
  throw UnknownProtocol("unknown protocol id " + std::to_string(static_cast<int>(id)));
}

Bytes AssetDeclStatement::encode() const {
  ByteWriter w;
  w.raw(z_theta.to_bytes()).u64(theta);
  return std::move(w).bytes();
}

Bytes AddressAuditStatement::encode() const {
  ByteWriter w;
  w.u32(index).raw(y.to_bytes()).raw(l.to_bytes()).raw(p.to_bytes()).u64(bal);
  return std::move(w).bytes();
}

AddressAuditStatement AddressAuditStatement::from_set(const CommitmentSet& published, std::uint32_t index) {
  if (index < 1 || index > published.set.size())
    throw InvalidArgument("index " + std::to_string(index) + " outside commitment set");
  const auto i = index - 1;
  return {index, published.set.keys[i], published.comms.l.at(i), published.comms.p.at(i),
          published.set.balances[i]};
}

ProtocolId protocol_of(const Statement& stmt) {
  return std::holds_alternative<AssetDeclStatement>(stmt) ? ProtocolId::kAssetDeclaration
                                                          : ProtocolId::kAddressAudit;
}

// ---------------------------------------------------------------- prover

SigmaProver::SigmaProver(ProtocolId id, std::vector<Scalar> nonces, const GroupParams& params)
    : protocol_(id), nonces_(std::move(nonces)) {
  if (nonces_.size() != arity(id)) throw ShapeError("nonce count does not match protocol arity");
  for (const auto& r : nonces_) commitment_.push_back(params.h * r);
}

SigmaProver::SigmaProver(SigmaProver&& other) noexcept
    : protocol_(other.protocol_), nonces_(std::move(other.nonces_)), commitment_(std::move(other.commitment_)) {
  other.nonces_.clear();
}

SigmaProver& SigmaProver::operator=(SigmaProver&& other) noexcept {
  protocol_ = other.protocol_;
  nonces_ = std::move(other.nonces_);
  commitment_ = std::move(other.commitment_);
  other.nonces_.clear();
  return *this;
}

SigmaProver::~SigmaProver() { std::fill(nonces_.begin(), nonces_.end(), Scalar{}); }

SigmaProver SigmaProver::with_nonces_for_testing(ProtocolId id, std::vector<Scalar> nonces,
                                                 const GroupParams& params) {
  return SigmaProver(id, std::move(nonces), params);
}

std::vector<Scalar> SigmaProver::take_nonces(ProtocolId expected) {
  if (protocol_ != expected) throw UnknownProtocol("prover state belongs to a different protocol");
  if (nonces_.empty()) throw NonceReuse("prover state already consumed");
  auto out = std::move(nonces_);
  nonces_.clear();
  return out;
}

Scalar SigmaProver::respond_asset(const Scalar& c, const Scalar& v) {
  auto r = take_nonces(ProtocolId::kAssetDeclaration);
  return r[0] + c * v;
}

std::vector<Scalar> SigmaProver::respond_address(const Scalar& c, const Scalar& t, const Scalar& v) {
  auto r = take_nonces(ProtocolId::kAddressAudit);
  return {r[0] + c * t, r[1] + c * v};
}

SigmaProver asset_decl_prove_step1(Rng& rng, const GroupParams& params) {
  return SigmaProver(ProtocolId::kAssetDeclaration, {Scalar::random(rng)}, params);
}

SigmaProver address_audit_prove_step1(Rng& rng, const GroupParams& params) {
  auto r1 = Scalar::random(rng);
  auto r2 = Scalar::random(rng);
  return SigmaProver(ProtocolId::kAddressAudit, {r1, r2}, params);
}

// -------------------------------------------------------------- verifier

bool asset_decl_verify(const AssetDeclStatement& stmt, const SigmaTranscript& t, const GroupParams& params) {
  return sigma_verify(stmt, t, params);
}

bool address_audit_verify(const AddressAuditStatement& stmt, const SigmaTranscript& t,
                          const GroupParams& params) {
  return sigma_verify(stmt, t, params);
}

bool sigma_verify(const Statement& stmt, const SigmaTranscript& t, const GroupParams& params) {
  try {
    return check_slots(statement_targets(stmt, params), t, params);
  } catch (const Error&) {
    return false;
  }
}

// ----------------------------------------------------------- Fiat-Shamir

Digest statement_hash(const Statement& stmt) {
  const auto id = protocol_of(stmt);
  const auto enc = std::visit([](const auto& s) { return s.encode(); }, stmt);
  return tagged_hash(domain_tag(id), enc);
}

Scalar fiat_shamir_challenge(ProtocolId id, const Digest& context, const std::vector<GroupElement>& commitment) {
  ByteWriter w;
  w.raw(context);
  for (const auto& lambda : commitment) w.raw(lambda.to_bytes());
  return hash_to_scalar(domain_tag(id), w.bytes());
}

NizkProof fiat_shamir_prove(ProtocolId id, const Statement& stmt, const Witness& wit, const GroupParams& params,
                            Rng& rng) {
  arity(id);  // rejects unknown ids
  if (protocol_of(stmt) != id) throw UnknownProtocol("statement does not belong to the named protocol");
  NizkProof proof;
  proof.protocol = id;
  proof.context = statement_hash(stmt);
  if (id == ProtocolId::kAssetDeclaration) {
    const auto* w = std::get_if<AssetDeclWitness>(&wit);
    if (w == nullptr) throw UnknownProtocol("witness does not belong to the asset declaration protocol");
    auto prover = asset_decl_prove_step1(rng, params);
    proof.transcript.commitment = prover.commitment();
    proof.transcript.challenge = fiat_shamir_challenge(id, proof.context, prover.commitment());
    proof.transcript.response = {prover.respond_asset(proof.transcript.challenge, w->v)};
  } else {
    const auto* w = std::get_if<AddressAuditWitness>(&wit);
    if (w == nullptr) throw UnknownProtocol("witness does not belong to the address audit protocol");
    auto prover = address_audit_prove_step1(rng, params);
    proof.transcript.commitment = prover.commitment();
    proof.transcript.challenge = fiat_shamir_challenge(id, proof.context, prover.commitment());
    proof.transcript.response = prover.respond_address(proof.transcript.challenge, w->t, w->v);
  }
  return proof;
}

bool fiat_shamir_verify(ProtocolId id, const Statement& stmt, const NizkProof& proof, const GroupParams& params) {
  try {
    if (proof.protocol != id || protocol_of(stmt) != id) return false;
    if (!well_formed(proof.transcript, arity(id))) return false;
    if (proof.context != statement_hash(stmt)) return false;
    if (proof.transcript.challenge != fiat_shamir_challenge(id, proof.context, proof.transcript.commitment))
      return false;
    return sigma_verify(stmt, proof.transcript, params);
  } catch (const Error&) {
    return false;
  }
}

Bytes NizkProof::encode() const {
  if (!well_formed(transcript, arity(protocol))) throw ShapeError("transcript arity does not match protocol");
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(protocol)).raw(context);
  for (const auto& lambda : transcript.commitment) w.raw(lambda.to_bytes());
  w.raw(transcript.challenge.to_bytes());
  for (const auto& theta : transcript.response) w.raw(theta.to_bytes());
  return std::move(w).bytes();
}

NizkProof NizkProof::decode(ByteView bytes) {
  ByteReader r(bytes);
  NizkProof proof;
  const auto id = r.u8();
  if (id != 1 && id != 2) throw DecodeError("unknown protocol id " + std::to_string(id));
  proof.protocol = static_cast<ProtocolId>(id);
  proof.context = r.fixed<32>();
  const auto k = arity(proof.protocol);
  for (std::size_t i = 0; i < k; ++i) proof.transcript.commitment.push_back(GroupElement::from_bytes(r.raw(32)));
  proof.transcript.challenge = Scalar::from_bytes(r.raw(32));
  for (std::size_t i = 0; i < k; ++i) proof.transcript.response.push_back(Scalar::from_bytes(r.raw(32)));
  r.expect_end();
  return proof;
}

std::string NizkProof::to_text() const {
  json commitments = json::array();
  for (const auto& lambda : transcript.commitment) commitments.push_back(to_hex(lambda));
  json responses = json::array();
  for (const auto& theta : transcript.response) responses.push_back(to_hex(theta));
  return json{{"protocol", static_cast<int>(protocol)},
              {"statement_hash", to_hex(context)},
              {"commitment", commitments},
              {"challenge", to_hex(transcript.challenge)},
              {"response", responses}}
             .dump(2) +
         "\n";
}

NizkProof NizkProof::from_text(std::string_view text) {
  // Re-encode through the binary layout so both mirrors share validation.
  try {
    const auto doc = json::parse(text);
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(doc.at("protocol").get<int>()));
    w.raw(from_hex(doc.at("statement_hash").get<std::string>()));
    for (const auto& c : doc.at("commitment")) w.raw(from_hex(c.get<std::string>()));
    w.raw(from_hex(doc.at("challenge").get<std::string>()));
    for (const auto& s : doc.at("response")) w.raw(from_hex(s.get<std::string>()));
    return decode(w.bytes());
  } catch (const json::exception& e) {
    throw DecodeError(std::string("proof text: ") + e.what());
  }
}

// ------------------------------------------------------ test-side oracles

std::vector<Scalar> extract_witness(const SigmaTranscript& t1, const SigmaTranscript& t2) {
  if (t1.commitment != t2.commitment) throw InvalidArgument("transcripts do not share a first message");
  if (t1.response.size() != t2.response.size() || t1.response.size() != t1.commitment.size())
    throw ShapeError("transcript arity mismatch");
  if (t1.challenge == t2.challenge) throw InvalidArgument("equal challenges: extraction undefined");
  const auto inv = (t1.challenge - t2.challenge).inverse();
  std::vector<Scalar> out;
  for (std::size_t k = 0; k < t1.response.size(); ++k) out.push_back((t1.response[k] - t2.response[k]) * inv);
  return out;
}

SigmaTranscript simulate_transcript(const Statement& stmt, const Scalar& c, const GroupParams& params, Rng& rng) {
  SigmaTranscript t;
  t.challenge = c;
  for (const auto& target : statement_targets(stmt, params)) {
    auto theta = Scalar::random(rng);
    t.commitment.push_back(params.h * theta - target * c);
    t.response.push_back(theta);
  }
  return t;
}

}  // namespace taxledger
