#include "taxledger/scenario.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "taxledger/assets.hpp"
#include "taxledger/protocols.hpp"

namespace taxledger {

ScenarioError::ScenarioError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(sep, start);
    if (end == std::string_view::npos) end = s.size();
    if (end > start) out.emplace_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

// Arity of positional arguments per command: {min, max}.
const std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>> kCommands = {
    {"period", {1, 1}},        {"seed", {1, 1}},          {"authority", {1, 1}},     {"key", {1, 1}},
    {"fund", {2, 2}},          {"register", {2, 2}},      {"certify", {3, 3}},       {"tx", {3, 4}},
    {"block", {0, 0}},         {"advance", {1, 1}},       {"rotate-key", {1, 1}},    {"checkpoint", {2, 2}},
    {"declare", {2, 2}},       {"exchange", {1, 1}},      {"declare-assets", {3, 3}}, {"audit-address", {2, 2}},
    {"status", {1, 1}},
};

constexpr std::string_view kOk = "OK";
constexpr std::string_view kVerificationFailed = "VerificationFailed";

struct Outcome {
  std::string name{kOk};
  std::string detail;
};

struct NamedAuthority {
  Authority authority;
  std::size_t generation = 0;
};

struct ExchangeBook {
  GeneratedAssets assets;
  AssetCommitments comms;
};

class Runner {
 public:
  explicit Runner(const ScenarioOptions& options) : cfg_(options.period), rng_(options.seed) {}

  ScenarioReport run(const Scenario& scenario) {
    ScenarioReport report;
    for (const auto& step : scenario.steps) {
      line_ = step.line;
      auto outcome = execute(step);
      StepResult r{step.line, step.text, outcome.name, step.expected, outcome.detail};
      if (!r.matched()) ++report.mismatches;
      report.steps.push_back(std::move(r));
    }
    line_ = 0;
    ensure_genesis();
    flush_pending();
    report.final_state = state_;
    report.state_digest = state_.digest();
    ByteWriter w;
    for (const auto& [name, a] : authorities_) w.str(name).blob(a.authority.snapshot());
    report.authority_digest = sha256(w.bytes());
    return report;
  }

 private:
  [[noreturn]] void error(const std::string& what) const { throw ScenarioError(line_, what); }

  std::uint64_t number(const std::string& s) const {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) error("expected a non-negative integer, got '" + s + "'");
    return v;
  }

  const KeyPair& key(const std::string& name) const {
    auto it = keys_.find(name);
    if (it == keys_.end()) error("unknown key '" + name + "'");
    return it->second;
  }
  NamedAuthority& authority(const std::string& name) {
    auto it = authorities_.find(name);
    if (it == authorities_.end()) error("unknown authority '" + name + "'");
    return it->second;
  }
  ExchangeBook& exchange(const std::string& name) {
    auto it = exchanges_.find(name);
    if (it == exchanges_.end()) error("unknown exchange '" + name + "'");
    return it->second;
  }

  void require_pre_genesis(const std::string& what) const {
    if (genesis_done_) error(what + " must precede the first ledger step");
  }

  void ensure_genesis() {
    if (genesis_done_) return;
    genesis_done_ = true;
    state_ = genesis(genesis_cfg_);
    pending_state_ = state_;
    block_ids_.clear();
  }

  // Commits the pending transactions (and authority update) as one block.
  void commit_block() {
    ensure_genesis();
    Block b;
    b.height = state_.height + 1;
    b.parent = state_.tip;
    b.txs = std::move(pending_txs_);
    b.authority_update = std::move(pending_update_);
    pending_txs_.clear();
    pending_update_.reset();
    state_ = apply_block(state_, b, cfg_);
    block_ids_.push_back(state_.tip);
    pending_state_ = state_;
  }

  void flush_pending() {
    if (!pending_txs_.empty() || pending_update_) commit_block();
  }

  Outcome execute(const ScenarioStep& s) {
    try {
      return dispatch(s);
    } catch (const LedgerError& e) {
      return {std::string(to_string(e.code())), e.what()};
    } catch (const AuthorityError& e) {
      return {std::string(to_string(e.code())), e.what()};
    } catch (const ScenarioError&) {
      throw;
    } catch (const Error& e) {
      error(e.what());
    }
  }

  Outcome dispatch(const ScenarioStep& s) {
    const auto& a = s.args;
    const auto& cmd = s.command;
    if (cmd == "period") {
      require_pre_genesis("period");
      cfg_.period_blocks = number(a[0]);
      if (cfg_.period_blocks == 0) error("period must be at least 1");
      return {};
    }
    if (cmd == "seed") {
      rng_ = Rng(from_hex(a[0]));
      return {};
    }
    if (cmd == "authority") {
      require_pre_genesis("authority");
      if (authorities_.contains(a[0])) error("authority '" + a[0] + "' already defined");
      const auto id = static_cast<AuthorityId>(s.options.contains("id") ? number(s.options.at("id"))
                                                                        : authorities_.size() + 1);
      auto kp = keygen("scenario/authority/" + a[0] + "/0");
      genesis_cfg_.authorities[id] = kp.vk;
      authorities_.emplace(a[0], NamedAuthority{Authority(id, kp), 0});
      return {std::string(kOk), "id=" + std::to_string(id)};
    }
    if (cmd == "key") {
      if (keys_.contains(a[0])) error("key '" + a[0] + "' already defined");
      auto kp = keygen("scenario/key/" + a[0]);
      keys_.emplace(a[0], kp);
      return {std::string(kOk), "address=" + to_hex(hash_to_address(kp.vk))};
    }
    if (cmd == "fund") {
      require_pre_genesis("fund");
      genesis_cfg_.allocations[hash_to_address(key(a[0]).vk)] += number(a[1]);
      return {};
    }
    if (cmd == "register") {
      authority(a[0]).authority.register_taxpayer(a[1]);
      return {};
    }
    if (cmd == "certify") {
      const auto alpha = hash_to_address(key(a[2]).vk);
      certs_[a[2]] = authority(a[0]).authority.certify_address(a[1], alpha);
      return {std::string(kOk), "alpha=" + to_hex(alpha)};
    }
    if (cmd == "tx") return do_tx(s);
    if (cmd == "block") {
      const auto count = s.options.contains("count") ? number(s.options.at("count")) : 1;
      if (count == 0) error("block count must be at least 1");
      for (std::uint64_t i = 0; i < count; ++i) commit_block();
      return {std::string(kOk), "height=" + std::to_string(state_.height)};
    }
    if (cmd == "advance") {
      const auto target = number(a[0]);
      ensure_genesis();
      if (target < state_.height) error("cannot advance backwards");
      flush_pending();
      while (state_.height < target) commit_block();
      return {std::string(kOk), "height=" + std::to_string(state_.height)};
    }
    if (cmd == "rotate-key") {
      auto& named = authority(a[0]);
      ensure_genesis();
      flush_pending();
      ++named.generation;
      pending_update_ =
          named.authority.rotate_key(keygen("scenario/authority/" + a[0] + "/" + std::to_string(named.generation)));
      commit_block();
      return {std::string(kOk), "height=" + std::to_string(state_.height)};
    }
    if (cmd == "checkpoint") {
      auto& named = authority(a[0]);
      const auto height = number(a[1]);
      ensure_genesis();
      if (height == 0 || height > block_ids_.size()) error("no block at height " + a[1]);
      const auto& id = block_ids_[height - 1];
      state_ = certify_checkpoint(state_, named.authority.certify_checkpoint(height, id), cfg_);
      pending_state_ = apply_pending(state_);
      return {std::string(kOk), "block=" + to_hex(id)};
    }
    if (cmd == "declare") {
      ensure_genesis();
      const auto theta = authority(a[0]).authority.compute_declared_assets(a[1], state_);
      if (s.options.contains("theta") && number(s.options.at("theta")) != theta)
        return {std::string(kVerificationFailed), "theta=" + std::to_string(theta)};
      return {std::string(kOk), "theta=" + std::to_string(theta)};
    }
    if (cmd == "exchange") return do_exchange(s);
    if (cmd == "declare-assets") {
      auto& named = authority(a[0]);
      auto& book = exchange(a[2]);
      const auto theta = total_assets(book.assets.set, book.assets.witness);
      const auto claimed = theta + (s.options.contains("overstate") ? number(s.options.at("overstate")) : 0);
      const auto& params = setup_group();
      const AssetDeclStatement stmt{aggregate_commitment(book.comms, params), claimed};
      auto proof = fiat_shamir_prove(ProtocolId::kAssetDeclaration, stmt,
                                     AssetDeclWitness{book.assets.witness.blinder_sum()}, params, rng_);
      const bool ok = named.authority.verify_asset_declaration(a[1], claimed, book.comms, proof);
      return {std::string(ok ? kOk : kVerificationFailed),
              "theta=" + std::to_string(claimed) + " proof=" + to_hex(sha256(proof.encode()))};
    }
    if (cmd == "audit-address") {
      auto& book = exchange(a[0]);
      const auto index = number(a[1]);
      const CommitmentSet published{book.assets.set, book.comms};
      const auto stmt = AddressAuditStatement::from_set(published, static_cast<std::uint32_t>(index));
      const auto i = index - 1;
      const AddressAuditWitness wit{book.assets.witness.blinders_t[i], book.assets.witness.blinders_v[i]};
      const auto& params = setup_group();
      auto proof = fiat_shamir_prove(ProtocolId::kAddressAudit, stmt, wit, params, rng_);
      const bool ok = fiat_shamir_verify(ProtocolId::kAddressAudit, stmt, proof, params);
      return {std::string(ok ? kOk : kVerificationFailed), "proof=" + to_hex(sha256(proof.encode()))};
    }
    if (cmd == "status") {
      ensure_genesis();
      const auto addr = hash_to_address(key(a[0]).vk);
      const auto status = freeze_status(state_, addr);
      return {std::string(to_string(status)), "balance=" + std::to_string(state_.balance_of(addr))};
    }
    error("unknown command '" + cmd + "'");
  }

  LedgerState apply_pending(const LedgerState& base) const {
    LedgerState s = base;
    for (const auto& tx : pending_txs_) s = apply_transaction(s, tx);
    return s;
  }

  Outcome do_tx(const ScenarioStep& s) {
    const auto& a = s.args;
    ensure_genesis();
    const auto& from = key(a[0]);
    const auto& to = key(a[1]);
    const auto amount = number(a[2]);
    Destination dest = hash_to_address(to.vk);
    if (a.size() == 4) {
      if (a[3] != "certified") error("expected 'certified', got '" + a[3] + "'");
      auto it = certs_.find(a[1]);
      if (it == certs_.end()) error("key '" + a[1] + "' has no certification");
      dest = it->second;
    }
    if (s.options.contains("forge")) {
      // A certification signed by a key that is not an authority.
      const auto alpha = hash_to_address(to.vk);
      dest = CertifiedAddress{alpha, sign(alpha.bytes, keygen("scenario/forger").sk), 1};
    }
    const auto source = hash_to_address(from.vk);
    auto tx = make_transaction(from, dest, amount, pending_state_.next_nonce(source));
    pending_state_ = apply_transaction(pending_state_, tx);
    pending_txs_.push_back(std::move(tx));
    return {std::string(kOk), "pending=" + std::to_string(pending_txs_.size())};
  }

  Outcome do_exchange(const ScenarioStep& s) {
    const auto& name = s.args[0];
    if (exchanges_.contains(name)) error("exchange '" + name + "' already defined");
    if (!s.options.contains("n")) error("exchange needs n=<size>");
    const auto n = number(s.options.at("n"));
    if (n == 0) error("exchange needs n >= 1");
    std::vector<bool> owned(n, false);
    if (s.options.contains("owned")) {
      for (const auto& idx : split(s.options.at("owned"), ',')) {
        const auto i = number(idx);
        if (i < 1 || i > n) error("owned index " + idx + " outside 1.." + std::to_string(n));
        owned[i - 1] = true;
      }
    }
    std::vector<std::uint64_t> balances;
    if (s.options.contains("balances")) {
      for (const auto& b : split(s.options.at("balances"), ',')) balances.push_back(number(b));
      if (balances.size() != n) error("balances must list n values");
    } else {
      for (std::size_t i = 0; i < n; ++i) balances.push_back(1 + rng_.uniform(1'000'000));
    }
    ExchangeBook book{generate_assets(n, owned, balances, rng_, setup_group()), {}};
    book.comms = build_asset_commitments(book.assets.set, book.assets.witness, setup_group());
    const auto theta = total_assets(book.assets.set, book.assets.witness);
    const auto digest = sha256(CommitmentSet{book.assets.set, book.comms}.encode());
    exchanges_.emplace(name, std::move(book));
    return {std::string(kOk), "theta=" + std::to_string(theta) + " commitments=" + to_hex(digest)};
  }

  TaxPeriodConfig cfg_;
  Rng rng_;
  std::size_t line_ = 0;
  GenesisConfig genesis_cfg_;
  bool genesis_done_ = false;
  LedgerState state_;
  LedgerState pending_state_;
  std::vector<Transaction> pending_txs_;
  std::optional<AuthorityUpdate> pending_update_;
  std::vector<BlockId> block_ids_;  // index h-1 holds the id at height h
  std::map<std::string, KeyPair> keys_;
  std::map<std::string, NamedAuthority> authorities_;
  std::map<std::string, CertifiedAddress> certs_;
  std::map<std::string, ExchangeBook> exchanges_;
};

}  // namespace

Scenario Scenario::parse(std::string_view text) {
  Scenario out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto line = text.substr(start, end - start);
    start = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    ScenarioStep step;
    step.line = line_no;
    step.text = std::string(line);
    std::istringstream words{std::string(line)};
    std::string word;
    words >> step.command;
    while (words >> word) {
      if (auto eq = word.find('='); eq != std::string::npos) {
        auto k = word.substr(0, eq);
        auto v = word.substr(eq + 1);
        if (k.empty() || v.empty()) throw ScenarioError(line_no, "malformed option '" + word + "'");
        if (!step.options.emplace(k, v).second) throw ScenarioError(line_no, "option '" + k + "' repeated");
      } else {
        step.args.push_back(word);
      }
    }
    auto cmd = kCommands.find(step.command);
    if (cmd == kCommands.end()) throw ScenarioError(line_no, "unknown command '" + step.command + "'");
    const auto [lo, hi] = cmd->second;
    if (step.args.size() < lo || step.args.size() > hi)
      throw ScenarioError(line_no, "'" + step.command + "' takes " + std::to_string(lo) +
                                       (lo == hi ? "" : "-" + std::to_string(hi)) + " arguments");
    if (auto it = step.options.find("expect"); it != step.options.end()) {
      step.expected = it->second;
      step.options.erase(it);
    }
    out.steps.push_back(std::move(step));
  }
  return out;
}

ScenarioReport run_scenario(const Scenario& scenario, const ScenarioOptions& options) {
  return Runner(options).run(scenario);
}

ScenarioReport run_scenario_file(const std::string& path, const ScenarioOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return run_scenario(Scenario::parse(buf.str()), options);
}

std::string ScenarioReport::to_text() const {
  std::ostringstream out;
  for (const auto& s : steps) {
    out << "line " << s.line << ": " << s.text << " -> " << s.outcome;
    if (!s.matched()) out << " (expected " << s.expected << ")";
    if (!s.detail.empty()) out << " [" << s.detail << "]";
    out << "\n";
  }
  out << "height: " << final_state.height << "\n";
  out << "state digest: " << to_hex(state_digest) << "\n";
  out << "authority digest: " << to_hex(authority_digest) << "\n";
  out << "result: " << (passed() ? "PASS" : "FAIL") << " (" << steps.size() << " steps, " << mismatches
      << " mismatches)\n";
  return out.str();
}

}  // namespace taxledger
