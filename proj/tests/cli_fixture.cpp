// Writes ledger files for the CLI tests: a state frozen at height 2 (period 2)
// and two candidate blocks, one legal and one spending frozen funds.

#include <fstream>
#include <iostream>

#include "ledger_fixture.hpp"

using namespace taxledger;

namespace {

void write(const std::string& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: cli_fixture DIR\n";
    return 2;
  }
  const std::string dir = argv[1];
  taxledger::testing::World w(2, {50, 0, 0});
  w.advance_to(2);
  write(dir + "/state.bin", w.state.encode());
  write(dir + "/good.bin", w.next_block({w.tx(0, w.certified(2), 20)}).encode());
  write(dir + "/frozen.bin", w.next_block({w.tx(0, w.addr(1), 20)}).encode());
  std::cout << to_hex(w.addr(0)) << " " << to_hex(w.addr(2)) << "\n";
  return 0;
}
