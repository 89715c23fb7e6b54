#pragma once

#include <string>
#include <vector>

#include "taxledger/ledger.hpp"

namespace taxledger::testing {

// Small world: named user keys, one authority (id 1), funded genesis.
struct World {
  TaxPeriodConfig cfg;
  KeyPair authority = keygen("authority-1");
  std::vector<KeyPair> users;
  LedgerState state;

  explicit World(std::uint64_t period, std::vector<std::uint64_t> funds) : cfg{period} {
    GenesisConfig g;
    g.authorities[1] = authority.vk;
    for (std::size_t i = 0; i < funds.size(); ++i) {
      users.push_back(keygen("user-" + std::to_string(i)));
      g.allocations[addr(i)] = funds[i];
    }
    state = genesis(g);
  }

  Address addr(std::size_t i) const { return hash_to_address(users[i].vk); }

  CertifiedAddress certified(std::size_t i, const KeyPair& signer) const {
    return {addr(i), sign(addr(i).bytes, signer.sk), 1};
  }
  CertifiedAddress certified(std::size_t i) const { return certified(i, authority); }

  Transaction tx(std::size_t from, Destination to, std::uint64_t amount) const {
    return make_transaction(users[from], std::move(to), amount, state.next_nonce(addr(from)));
  }

  Block next_block(std::vector<Transaction> txs = {}) const {
    Block b;
    b.height = state.height + 1;
    b.parent = state.tip;
    b.txs = std::move(txs);
    return b;
  }

  void advance_to(std::uint64_t height) {
    while (state.height < height) state = apply_block(state, next_block(), cfg);
  }
};

}  // namespace taxledger::testing
