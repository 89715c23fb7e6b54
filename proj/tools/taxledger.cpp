// Command-line front end: scenario runner, proof files and ledger state files.
//
// Exit codes: 0 success, 1 verification failure or scenario mismatch,
// 2 I/O or format error, 3 ledger rule violation.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "taxledger/assets.hpp"
#include "taxledger/protocols.hpp"
#include "taxledger/scenario.hpp"

using namespace taxledger;

namespace {

enum Exit : int { kSuccess = 0, kVerificationFailed = 1, kFormatError = 2, kRuleViolation = 3 };

enum class Format { kBinary, kText };

struct Common {
  std::string seed_hex;
  std::uint64_t period = kDefaultPeriodBlocks;
  std::string out;
  Format format = Format::kBinary;
};

Bytes seed_bytes(const Common& c) {
  if (!c.seed_hex.empty()) return from_hex(c.seed_hex);
  if (const char* env = std::getenv("TAXLEDGER_SEED"); env && *env) return from_hex(env);
  return ScenarioOptions{}.seed;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view data) {
  if (path.empty() || path == "-") {
    std::cout << data;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("cannot write '" + path + "'");
}

std::string_view as_chars(const Bytes& b) { return {reinterpret_cast<const char*>(b.data()), b.size()}; }

// Text files are JSON objects; everything else is read as canonical binary.
bool looks_textual(const std::string& data) {
  const auto first = data.find_first_not_of(" \t\r\n");
  return first != std::string::npos && data[first] == '{';
}

template <typename T>
T load(const std::string& path) {
  const auto data = read_file(path);
  if (looks_textual(data)) return T::from_text(data);
  return T::decode(as_bytes(data));
}

template <typename T>
void store(const std::string& path, const T& value, Format f) {
  if (f == Format::kText)
    write_file(path, value.to_text());
  else
    write_file(path, as_chars(value.encode()));
}

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
  cmd->add_option("--seed", c.seed_hex, "Hex seed for reproducible randomness (default: $TAXLEDGER_SEED)");
  cmd->add_option("--period", c.period, "Blocks per tax period")->check(CLI::PositiveNumber);
  if (with_out) {
    cmd->add_option("--out", c.out, "Output path (default: stdout)");
    cmd->add_option("--format", c.format, "Output encoding")
        ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"binary", Format::kBinary},
                                                                          {"text", Format::kText}}));
  }
}

std::vector<std::size_t> parse_indices(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream in(csv);
  for (std::string tok; std::getline(in, tok, ',');)
    if (!tok.empty()) out.push_back(std::stoul(tok));
  return out;
}

AddressAuditStatement address_statement(const CommitmentSet& set, std::uint32_t index) {
  return AddressAuditStatement::from_set(set, index);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tax-auditable ledger simulator and asset-declaration proofs"};
  app.require_subcommand(1);
  std::function<int()> action;

  // run
  Common run_opts;
  std::string scenario_path;
  auto* run = app.add_subcommand("run", "Run a scenario script and print its report");
  run->add_option("scenario", scenario_path)->required();
  add_common(run, run_opts);
  run->callback([&] {
    action = [&] {
      auto report = run_scenario_file(scenario_path, {seed_bytes(run_opts), {run_opts.period}});
      write_file(run_opts.out, report.to_text());
      return report.passed() ? kSuccess : kVerificationFailed;
    };
  });

  // gen-assets
  Common gen_opts;
  std::size_t gen_n = 0;
  std::string gen_owned, gen_balances, gen_witness;
  auto* gen = app.add_subcommand("gen-assets", "Generate an anonymity set, its commitments and the witness");
  gen->add_option("--n", gen_n, "Anonymity set size")->required()->check(CLI::PositiveNumber);
  gen->add_option("--owned", gen_owned, "Comma-separated 1-based indices the exchange owns");
  gen->add_option("--balances", gen_balances, "Comma-separated balances (default: random)");
  gen->add_option("--witness", gen_witness, "Witness output path (always text)")->required();
  add_common(gen, gen_opts);
  gen->callback([&] {
    action = [&] {
      Rng rng(seed_bytes(gen_opts));
      std::vector<bool> owned(gen_n, false);
      for (auto i : parse_indices(gen_owned)) {
        if (i < 1 || i > gen_n) throw InvalidArgument("owned index outside 1..n");
        owned[i - 1] = true;
      }
      std::vector<std::uint64_t> balances;
      for (auto b : parse_indices(gen_balances)) balances.push_back(b);
      if (balances.empty())
        for (std::size_t i = 0; i < gen_n; ++i) balances.push_back(1 + rng.uniform(1'000'000));
      if (balances.size() != gen_n) throw InvalidArgument("--balances must list n values");
      const auto& params = setup_group();
      auto assets = generate_assets(gen_n, owned, balances, rng, params);
      const CommitmentSet published{assets.set, build_asset_commitments(assets.set, assets.witness, params)};
      store(gen_opts.out, published, gen_opts.format);
      write_file(gen_witness, witness_to_text(assets.witness));
      std::cerr << "theta=" << total_assets(assets.set, assets.witness) << "\n";
      return kSuccess;
    };
  });

  // prove-asset / verify-asset
  Common pa_opts;
  std::string pa_comms, pa_witness;
  auto* pa = app.add_subcommand("prove-asset", "Prove the total of the owned balances");
  pa->add_option("--commitments", pa_comms)->required();
  pa->add_option("--witness", pa_witness)->required();
  add_common(pa, pa_opts);
  pa->callback([&] {
    action = [&] {
      const auto set = load<CommitmentSet>(pa_comms);
      const auto wit = witness_from_text(read_file(pa_witness));
      const auto& params = setup_group();
      const auto theta = total_assets(set.set, wit);
      Rng rng(seed_bytes(pa_opts));
      const AssetDeclStatement stmt{aggregate_commitment(set.comms, params), theta};
      auto proof = fiat_shamir_prove(ProtocolId::kAssetDeclaration, stmt, AssetDeclWitness{wit.blinder_sum()},
                                     params, rng);
      store(pa_opts.out, proof, pa_opts.format);
      std::cerr << "theta=" << theta << "\n";
      return kSuccess;
    };
  });

  std::string va_comms, va_proof;
  std::uint64_t va_theta = 0;
  auto* va = app.add_subcommand("verify-asset", "Check a proof of total assets against the commitments");
  va->add_option("--commitments", va_comms)->required();
  va->add_option("--proof", va_proof)->required();
  va->add_option("--theta", va_theta, "Declared total")->required();
  va->callback([&] {
    action = [&] {
      const auto set = load<CommitmentSet>(va_comms);
      const auto proof = load<NizkProof>(va_proof);
      const auto& params = setup_group();
      const AssetDeclStatement stmt{aggregate_commitment(set.comms, params), va_theta};
      const bool ok = fiat_shamir_verify(ProtocolId::kAssetDeclaration, stmt, proof, params);
      std::cout << (ok ? "OK" : "VerificationFailed") << "\n";
      return ok ? kSuccess : kVerificationFailed;
    };
  });

  // prove-address / verify-address
  Common pd_opts;
  std::string pd_comms, pd_witness;
  std::uint32_t pd_index = 0;
  auto* pd = app.add_subcommand("prove-address", "Prove one commitment pair is well formed");
  pd->add_option("--commitments", pd_comms)->required();
  pd->add_option("--witness", pd_witness)->required();
  pd->add_option("--index", pd_index, "1-based entry")->required();
  add_common(pd, pd_opts);
  pd->callback([&] {
    action = [&] {
      const auto set = load<CommitmentSet>(pd_comms);
      const auto wit = witness_from_text(read_file(pd_witness));
      const auto stmt = address_statement(set, pd_index);
      const auto i = pd_index - 1;
      if (i >= wit.blinders_t.size() || i >= wit.blinders_v.size())
        throw ShapeError("witness does not cover index " + std::to_string(pd_index));
      Rng rng(seed_bytes(pd_opts));
      auto proof = fiat_shamir_prove(ProtocolId::kAddressAudit, stmt,
                                     AddressAuditWitness{wit.blinders_t[i], wit.blinders_v[i]}, setup_group(), rng);
      store(pd_opts.out, proof, pd_opts.format);
      return kSuccess;
    };
  });

  std::string vd_comms, vd_proof;
  std::uint32_t vd_index = 0;
  auto* vd = app.add_subcommand("verify-address", "Check an address audit proof");
  vd->add_option("--commitments", vd_comms)->required();
  vd->add_option("--proof", vd_proof)->required();
  vd->add_option("--index", vd_index, "1-based entry")->required();
  vd->callback([&] {
    action = [&] {
      const auto set = load<CommitmentSet>(vd_comms);
      const auto proof = load<NizkProof>(vd_proof);
      const bool ok =
          fiat_shamir_verify(ProtocolId::kAddressAudit, address_statement(set, vd_index), proof, setup_group());
      std::cout << (ok ? "OK" : "VerificationFailed") << "\n";
      return ok ? kSuccess : kVerificationFailed;
    };
  });

  // ledger apply / ledger status
  auto* ledger = app.add_subcommand("ledger", "Ledger state files");
  ledger->require_subcommand(1);

  Common la_opts;
  std::string la_scenario, la_state, la_block;
  auto* la = ledger->add_subcommand("apply", "Apply a scenario, or one block to a state, and write the new state");
  auto* la_scn = la->add_option("--scenario", la_scenario, "Scenario script run against a fresh state");
  auto* la_st = la->add_option("--state", la_state, "Input state file");
  auto* la_bl = la->add_option("--block", la_block, "Binary block file applied to --state");
  la_scn->excludes(la_st)->excludes(la_bl);
  la_st->needs(la_bl);
  la_bl->needs(la_st);
  add_common(la, la_opts);
  la->callback([&] {
    action = [&] {
      if (!la_scenario.empty()) {
        auto report = run_scenario_file(la_scenario, {seed_bytes(la_opts), {la_opts.period}});
        std::cerr << report.to_text();
        store(la_opts.out, report.final_state, la_opts.format);
        return report.passed() ? kSuccess : kVerificationFailed;
      }
      if (la_state.empty()) throw InvalidArgument("ledger apply needs --scenario or --state with --block");
      const auto state = load<LedgerState>(la_state);
      const auto block_bytes = read_file(la_block);
      const auto block = Block::decode(as_bytes(block_bytes));
      store(la_opts.out, apply_block(state, block, TaxPeriodConfig{la_opts.period}), la_opts.format);
      return kSuccess;
    };
  });

  std::string ls_state, ls_address;
  auto* ls = ledger->add_subcommand("status", "Print Liquid or Frozen for an address");
  ls->add_option("--state", ls_state)->required();
  ls->add_option("--address", ls_address, "Hex address (25 bytes)")->required();
  ls->callback([&] {
    action = [&] {
      const auto state = load<LedgerState>(ls_state);
      const auto addr = Address::from_bytes(from_hex(ls_address));
      std::cout << to_string(freeze_status(state, addr)) << "\n";
      return kSuccess;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kSuccess : kFormatError;
  }

  try {
    return action();
  } catch (const LedgerError& e) {
    std::cerr << "rule violation: " << e.what() << "\n";
    return kRuleViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFormatError;
  }
}
