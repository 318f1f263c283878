#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

// End-to-end checks of the command-line surface: JSON in, JSON out, stable
// exit codes, and the verify round trip.

using Json = nlohmann::ordered_json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args, const std::string& input = "") {
  const std::string dir = "/tmp/maxlab_cli_test";
  std::system(("mkdir -p " + dir).c_str());
  const std::string in_path = dir + "/in.json";
  const std::string out_path = dir + "/out.json";
  {
    std::ofstream in(in_path);
    in << input;
  }
  const std::string cmd = std::string(MAXLAB_CLI_PATH) + " " + args + " < " + in_path +
                          " > " + out_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = WEXITSTATUS(status);
  std::ifstream out(out_path);
  std::stringstream buf;
  buf << out.rdbuf();
  res.out = buf.str();
  return res;
}

Json parse_out(const CliResult& res) { return Json::parse(res.out); }

}  // namespace

TEST_CASE("family pipeline: encode, greedy, decode") {
  const auto encoded = run_cli("family encode-range",
                               R"({"f":[5,3],"members":6,"horizon":12})");
  REQUIRE(encoded.exit_code == 0);
  const Json fam = parse_out(encoded)["output"]["family"];

  Json greedy_in{{"family", fam}, {"property", {{"kind", "f"}}}, {"start", 3}};
  const auto greedy = run_cli("family greedy", greedy_in.dump());
  REQUIRE(greedy.exit_code == 0);
  const Json gout = parse_out(greedy)["output"];
  CHECK(gout["indices"] == Json::array({3, 5}));
  CHECK(gout["exhausted"] == true);

  Json decode_in{{"family", fam},
                 {"subfamily", {{"indices", Json::array({3, 5})}}},
                 {"property", {{"kind", "f"}}}};
  const auto decoded = run_cli("family decode-range", decode_in.dump());
  REQUIRE(decoded.exit_code == 0);
  CHECK(parse_out(decoded)["output"]["decoded"] == Json::array({3, 5}));

  // the greedy artifact re-validates
  const auto verified = run_cli("verify oracle", greedy.out);
  REQUIRE(verified.exit_code == 0);
  CHECK(parse_out(verified)["ok"] == true);
}

TEST_CASE("tree pipeline decodes the live tree") {
  const Json input{{"depth", 2},
                   {"trees", Json::array({Json::array(),            // dead root
                                          Json::parse("[[[],[]],[[],[]]]")})}};
  const auto res = run_cli("nce decode-paths", input.dump());
  REQUIRE(res.exit_code == 0);
  const Json doc = parse_out(res);
  CHECK(doc["output"]["paths"] == Json::array({1}));

  const auto verified = run_cli("verify oracle", res.out);
  REQUIRE(verified.exit_code == 0);
  CHECK(parse_out(verified)["ok"] == true);
}

TEST_CASE("closure ce-max artifact verifies as maximal") {
  const Json input{
      {"op", {{"rules", Json::array({Json{{"from", Json::array({1})}, {"to", 2}}})}}},
      {"pred", {{"type", "avoid"}, {"banned", Json::array({2})}, {"universe", 10}}},
      {"ambient", Json::array({1, 2, 3, 4, 5, 6, 7, 8, 9})},
      {"seed", Json::array()}};
  const auto res = run_cli("closure ce-max", input.dump());
  REQUIRE(res.exit_code == 0);
  CHECK(parse_out(res)["output"]["maximal_set"] ==
        Json::array({3, 4, 5, 6, 7, 8, 9}));

  const auto verified = run_cli("verify oracle", res.out);
  REQUIRE(verified.exit_code == 0);
  const Json vout = parse_out(verified);
  CHECK(vout["ok"] == true);
  CHECK(vout["maximal"] == true);
}

TEST_CASE("choice-rule solver artifacts verify in both modes") {
  const Json op{{"rules", Json::array({Json{{"from", Json::array()},
                                            {"choices", Json::array({0, 1, 2, 3, 4})}},
                                       Json{{"from", Json::array({1})},
                                            {"choices", Json::array({3, 4})}}})}};
  for (const std::string mode : {"exact", "greedy"}) {
    Json input{{"op", op},
               {"pred", {{"type", "true"}, {"universe", 5}}},
               {"ambient", Json::array({0, 1, 2, 3, 4})},
               {"seed", Json::array()},
               {"mode", mode}};
    const auto res = run_cli("nce max", input.dump());
    REQUIRE(res.exit_code == 0);
    const auto verified = run_cli("verify oracle", res.out);
    REQUIRE(verified.exit_code == 0);
    CHECK(parse_out(verified)["maximal"] == true);
  }
}

TEST_CASE("schema violations exit 2 with a machine-readable error") {
  const auto res = run_cli("family greedy", "{}");
  CHECK(res.exit_code == 2);
  const Json err = parse_out(res);
  CHECK(err["error"] == "SchemaError");

  const auto malformed = run_cli("family greedy", "not json at all");
  CHECK(malformed.exit_code == 2);

  const auto usage = run_cli("family no-such-thing", "{}");
  CHECK(usage.exit_code == 2);
}

TEST_CASE("domain errors exit 1 with the module error name") {
  const auto encoded = run_cli("family encode-range",
                               R"({"f":[],"members":3,"horizon":8})");
  REQUIRE(encoded.exit_code == 0);
  const Json fam = parse_out(encoded)["output"]["family"];
  Json decode_in{{"family", fam},
                 {"subfamily", {{"indices", Json::array({0, 1})}}},
                 {"property", {{"kind", "f"}}}};
  const auto res = run_cli("family decode-range", decode_in.dump());
  CHECK(res.exit_code == 1);
  CHECK(parse_out(res)["error"] == "DegenerateMaximalFamily");
}

TEST_CASE("schema dumps are available") {
  const auto res = run_cli("family greedy --schema");
  REQUIRE(res.exit_code == 0);
  const Json doc = parse_out(res);
  CHECK(doc["command"] == "family greedy");
  CHECK(doc.contains("input"));
}

TEST_CASE("identical invocations are bit-identical") {
  const std::string input = R"({"f":[2,0],"members":4,"horizon":10})";
  const auto a = run_cli("family encode-range", input);
  const auto b = run_cli("family encode-range", input);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("construct subcommands run end to end") {
  const Json fam{{"horizon", 8},
                 {"members", Json::array({Json::array({0, 1, 2, 3, 4, 5, 6, 7}),
                                          Json::array({0, 2, 4, 6}),
                                          Json::array({0, 1, 4})})}};
  SUBCASE("permit") {
    Json input{{"family", fam}, {"stages", 12}};
    const auto res = run_cli("construct permit", input.dump());
    REQUIRE(res.exit_code == 0);
    const auto verified = run_cli("verify oracle", res.out);
    CHECK(verified.exit_code == 0);
  }
  SUBCASE("escape") {
    Json input{{"family", fam}, {"fast", Json::array({8, 8, 8, 8, 8, 8})}, {"steps", 6}};
    const auto res = run_cli("construct escape", input.dump());
    REQUIRE(res.exit_code == 0);
    const auto verified = run_cli("verify oracle", res.out);
    CHECK(verified.exit_code == 0);
  }
  SUBCASE("forcing and pi01g") {
    Json finput{{"family", fam}, {"steps", 5}};
    const auto fres = run_cli("construct forcing", finput.dump());
    REQUIRE(fres.exit_code == 0);
    CHECK(run_cli("verify oracle", fres.out).exit_code == 0);

    Json ginput{{"family", fam}, {"indices", Json::array({0, 1, 2})}, {"steps", 8}};
    const auto gres = run_cli("construct pi01g", ginput.dump());
    REQUIRE(gres.exit_code == 0);
    CHECK(run_cli("verify oracle", gres.out).exit_code == 0);
  }
  SUBCASE("adversary with a transcript file") {
    Json input{{"strategies", Json::array({Json::array({Json::array({1, 5}), Json::array({2, 9})})})},
               {"stages", 10},
               {"caps", {{"max_string_length", 2}, {"max_items_per_step", 2}}}};
    const std::string tpath = "/tmp/maxlab_cli_test/transcript.jsonl";
    const auto res = run_cli("construct adversary --transcript " + tpath, input.dump());
    REQUIRE(res.exit_code == 0);
    const Json doc = parse_out(res);
    CHECK(doc["output"]["transcript_file"] == tpath);
    std::ifstream t(tpath);
    std::string first_line;
    std::getline(t, first_line);
    const Json first = Json::parse(first_line);
    CHECK(first.contains("stage"));
    CHECK(first.contains("event"));
  }
}

TEST_CASE("encoding artifacts re-validate through verify") {
  SUBCASE("encode-range") {
    const auto res = run_cli("family encode-range", R"({"f":[2,0],"members":4,"horizon":10})");
    REQUIRE(res.exit_code == 0);
    CHECK(parse_out(run_cli("verify oracle", res.out))["ok"] == true);
  }
  SUBCASE("tilde") {
    const Json fam{{"horizon", 4},
                   {"members", Json::array({Json::array({0}), Json::array({0, 1}),
                                            Json::array({0, 2})})}};
    Json input{{"family", fam}, {"n", 2}, {"stages", 5}};
    const auto res = run_cli("family tilde", input.dump());
    REQUIRE(res.exit_code == 0);
    CHECK(parse_out(run_cli("verify oracle", res.out))["ok"] == true);
  }
  SUBCASE("semilattice") {
    const Json lat{{"size", 3},
                   {"leq", Json::array({Json::array({0, 1}), Json::array({0, 2}),
                                        Json::array({1, 2})})},
                   {"join", Json::array({Json::array({0, 1, 2}), Json::array({1, 1, 2}),
                                         Json::array({2, 2, 2})})},
                   {"top", 2}};
    const auto res = run_cli("closure semilattice", Json{{"lattice", lat}}.dump());
    REQUIRE(res.exit_code == 0);
    CHECK(parse_out(run_cli("verify oracle", res.out))["ok"] == true);
  }
  SUBCASE("tree-encode") {
    const Json input{{"depth", 2}, {"trees", Json::array({Json::parse("[[],[[]]]")})}};
    const auto res = run_cli("nce tree-encode", input.dump());
    REQUIRE(res.exit_code == 0);
    CHECK(parse_out(run_cli("verify oracle", res.out))["ok"] == true);
  }
}

TEST_CASE("flag overrides replace input fields") {
  const auto base = run_cli("family encode-range", R"({"f":[1],"members":3,"horizon":8})");
  const auto overridden =
      run_cli("family encode-range --horizon 12", R"({"f":[1],"members":3,"horizon":8})");
  REQUIRE(base.exit_code == 0);
  REQUIRE(overridden.exit_code == 0);
  CHECK(parse_out(base)["output"]["family"]["horizon"] == 8);
  CHECK(parse_out(overridden)["output"]["family"]["horizon"] == 12);

  const Json fam{{"horizon", 8},
                 {"members", Json::array({Json::array({0, 1, 2, 3}), Json::array({0, 2})})}};
  const auto permit =
      run_cli("construct permit --stages 3", Json{{"family", fam}, {"stages", 99}}.dump());
  REQUIRE(permit.exit_code == 0);
  CHECK(parse_out(permit)["output"]["history"].size() == 4);  // stages 0..3
}

TEST_CASE("the divisible pointwise filter is available") {
  const Json input{{"pred", {{"type", "divisible"}, {"by", 2}, {"universe", 10}}},
                   {"set", Json::array({1, 2, 3, 4, 6})}};
  const auto res = run_cli("fcp max", input.dump());
  REQUIRE(res.exit_code == 0);
  CHECK(parse_out(res)["output"]["kept"] == Json::array({2, 4, 6}));
}

TEST_CASE("the seeded generator is deterministic and feeds the solvers") {
  const auto a = run_cli("gen family --members 4 --horizon 10 --seed 7");
  const auto b = run_cli("gen family --members 4 --horizon 10 --seed 7");
  const auto c = run_cli("gen family --members 4 --horizon 10 --seed 8");
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  const Json fam = parse_out(a)["family"];
  REQUIRE(fam["members"].size() == 4);
  Json greedy_in{{"family", fam}, {"property", {{"kind", "dbar"}, {"n", 2}}}};
  const auto greedy = run_cli("family greedy", greedy_in.dump());
  REQUIRE(greedy.exit_code == 0);
  CHECK(parse_out(run_cli("verify oracle", greedy.out))["ok"] == true);
}

TEST_CASE("verify parallelizes over artifact arrays deterministically") {
  const auto one = run_cli("closure cl",
                           R"({"op":{"rules":[{"from":[1],"to":2}]},"set":[1]})");
  REQUIRE(one.exit_code == 0);
  Json batch = Json::array();
  for (int i = 0; i < 6; ++i) batch.push_back(Json::parse(one.out));
  {
    std::ofstream f("/tmp/maxlab_cli_test/batch.json");
    f << batch.dump();
  }
  const auto seq = run_cli("verify oracle --in /tmp/maxlab_cli_test/batch.json --jobs 1");
  const auto par = run_cli("verify oracle --in /tmp/maxlab_cli_test/batch.json --jobs 4");
  REQUIRE(seq.exit_code == 0);
  REQUIRE(par.exit_code == 0);
  CHECK(seq.out == par.out);
}
