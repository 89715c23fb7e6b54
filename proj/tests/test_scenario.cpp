#include <doctest.h>

#include <fstream>
#include <sstream>

#include "taxledger/scenario.hpp"

using namespace taxledger;

namespace {

ScenarioReport run(std::string_view text) { return run_scenario(Scenario::parse(text), {}); }

std::size_t error_line(std::string_view text) {
  try {
    run(text);
  } catch (const ScenarioError& e) {
    return e.line();
  }
  FAIL("expected a ScenarioError");
  return 0;
}

}  // namespace

TEST_CASE("empty scenario") {
  auto r = run("");
  CHECK(r.steps.empty());
  CHECK(r.passed());
  CHECK(r.final_state.height == 0);
  CHECK(run("# only a comment\n\n   \n").steps.empty());
  CHECK(r.to_text() == run("").to_text());
}

TEST_CASE("parse") {
  auto s = Scenario::parse("tx a b 5 certified expect=FrozenSource  # trailing\nblock count=1\n");
  REQUIRE(s.steps.size() == 2);
  CHECK(s.steps[0].line == 1);
  CHECK(s.steps[0].args == std::vector<std::string>{"a", "b", "5", "certified"});
  CHECK(s.steps[0].expected == "FrozenSource");
  CHECK(s.steps[0].options.empty());
  CHECK(s.steps[0].text == "tx a b 5 certified expect=FrozenSource");
  CHECK(s.steps[1].options.at("count") == "1");
  CHECK(s.steps[1].expected == "OK");
}

TEST_CASE("malformed scripts name the line") {
  CHECK(error_line("key a\n\nfrobnicate\n") == 3);
  CHECK(error_line("key\n") == 1);
  CHECK(error_line("key a\nkey b x=\n") == 2);
  CHECK(error_line("key a\ntx a ghost 1\n") == 2);
  CHECK(error_line("key a\nfund a many\n") == 2);
  CHECK(error_line("key a\nblock\nfund a 1\n") == 3);
  CHECK(error_line("key a\nkey a\n") == 2);
  CHECK(error_line("status nobody\n") == 1);
  CHECK(error_line("register nobody alice\n") == 1);
  CHECK(error_line("period 0\n") == 1);
  CHECK(error_line("block count=0\n") == 1);
  CHECK(error_line("advance 3\nadvance 2\n") == 2);
}

TEST_CASE("rule violations become outcomes") {
  auto r = run(
      "period 3\nkey a\nkey b\nfund a 10\n"
      "tx a b 11 expect=InsufficientBalance\n"
      "tx a b 0 expect=ZeroAmount\n"
      "tx a b 4\ntx a b 6\ntx a b 1 expect=InsufficientBalance\n"
      "block\nstatus b expect=Liquid\n");
  CHECK(r.passed());
  CHECK(r.final_state.height == 1);
  CHECK(r.steps.back().outcome == "Liquid");

  auto mismatch = run("key a\nkey b\nfund a 1\ntx a b 2\n");
  CHECK_FALSE(mismatch.passed());
  CHECK(mismatch.mismatches == 1);
  CHECK(mismatch.steps.back().outcome == "InsufficientBalance");
  CHECK(mismatch.to_text().find("(expected OK)") != std::string::npos);
}

TEST_CASE("pending transactions commit at the end") {
  auto r = run("key a\nkey b\nfund a 5\ntx a b 5\n");
  CHECK(r.final_state.height == 1);
  CHECK(r.final_state.balance_of(hash_to_address(keygen("scenario/key/b").vk)) == 5);
}

TEST_CASE("reports are deterministic and seed dependent") {
  const auto text = "authority t\nregister t x\nexchange e n=4 owned=1,4\ndeclare-assets t x e\n";
  auto a = run(text), b = run(text);
  CHECK(a.to_text() == b.to_text());
  ScenarioOptions other;
  other.seed = {1, 2, 3};
  auto c = run_scenario(Scenario::parse(text), other);
  CHECK(c.passed());
  CHECK(c.to_text() != a.to_text());
  auto d = run(std::string("seed 010203\n") + text);
  CHECK(d.steps.back().detail == c.steps.back().detail);
}

TEST_CASE("bundled scenarios match their golden reports") {
  for (const std::string name : {"freeze_demo", "declare_demo"}) {
    CAPTURE(name);
    const auto base = std::string(TAXLEDGER_SCENARIO_DIR) + "/" + name;
    auto r = run_scenario_file(base + ".scn", {});
    CHECK(r.passed());
    std::ifstream golden(base + ".golden");
    REQUIRE(golden);
    std::ostringstream expected;
    expected << golden.rdbuf();
    CHECK(r.to_text() == expected.str());
  }
}

TEST_CASE("freeze_demo rejects the plain spend after the audit block") {
  auto r = run_scenario_file(std::string(TAXLEDGER_SCENARIO_DIR) + "/freeze_demo.scn", {});
  bool saw = false;
  for (const auto& s : r.steps)
    if (s.text.starts_with("tx alice bob 5 ") && s.outcome == "FrozenSource") saw = true;
  CHECK(saw);
  CHECK(r.final_state.height > kDefaultPeriodBlocks);
}

TEST_CASE("block count") {
  CHECK(run("block count=3\nblock\n").final_state.height == 4);
}
