#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "peapod/errors.hpp"
#include "scenario.hpp"
#include "schema.hpp"

using namespace peapod;
using namespace peapod::cli;
using nlohmann::json;

namespace {

json config(const std::string& name) {
  return read_document(std::filesystem::path(PEAPOD_SOURCE_DIR) / "configs" / name);
}

}  // namespace

TEST_CASE("schema subset validator") {
  const json schema = json::parse(R"({
    "type": "object", "additionalProperties": false, "required": ["a"],
    "properties": {
      "a": {"type": "integer", "minimum": 1},
      "b": {"type": ["number", "null"], "exclusiveMinimum": 0},
      "c": {"type": "array", "minItems": 1, "maxItems": 2, "items": {"enum": ["x", "y"]}},
      "d": {"$ref": "#/$defs/flag"}
    },
    "$defs": {"flag": {"type": "boolean"}}
  })");
  CHECK(validate_schema(schema, json::parse(R"({"a": 2})")).empty());
  CHECK(validate_schema(schema, json::parse(R"({"a": 2.0, "b": null, "c": ["x"], "d": true})")).empty());
  CHECK(validate_schema(schema, json::parse(R"({})")).size() == 1);
  CHECK(validate_schema(schema, json::parse(R"({"a": 0})")).size() == 1);
  CHECK(validate_schema(schema, json::parse(R"({"a": 1.5})")).size() == 1);
  CHECK(validate_schema(schema, json::parse(R"({"a": 1, "b": 0})")).size() == 1);
  CHECK(validate_schema(schema, json::parse(R"({"a": 1, "c": []})")).size() == 1);
  CHECK(validate_schema(schema, json::parse(R"({"a": 1, "c": ["x", "y", "x"]})")).size() == 1);
  CHECK(validate_schema(schema, json::parse(R"({"a": 1, "c": ["z"]})")).size() == 1);
  CHECK(validate_schema(schema, json::parse(R"({"a": 1, "d": 1})")).size() == 1);
  const auto v = validate_schema(schema, json::parse(R"({"a": 1, "zz": 1})"));
  REQUIRE(v.size() == 1);
  CHECK(v[0].path == "/zz");
  CHECK(validate_schema(schema, json::parse("[1]")).size() == 1);
}

TEST_CASE("every shipped config validates") {
  for (const auto& entry : std::filesystem::directory_iterator(std::filesystem::path(PEAPOD_SOURCE_DIR) / "configs")) {
    CAPTURE(entry.path().string());
    const auto doc = read_document(entry.path());
    CHECK(validate_schema(scenario_schema(), doc).empty());
  }
}

TEST_CASE("dotted overrides") {
  json doc = json::object();
  apply_override(doc, "register.count=4");
  apply_override(doc, "register.species=N15");
  apply_override(doc, "plan.search=true");
  apply_override(doc, "readout.caged_distribution=[0.25,0.25,0.25,0.25]");
  apply_override(doc, "readout.caged_distribution.1=0.5");
  apply_override(doc, "transfer.mobile_T2_s=null");
  CHECK(doc["register"]["count"] == 4);
  CHECK(doc["register"]["species"] == "N15");
  CHECK(doc["plan"]["search"] == true);
  CHECK(doc["readout"]["caged_distribution"][1] == 0.5);
  CHECK(doc["transfer"]["mobile_T2_s"].is_null());
  CHECK_THROWS_AS(apply_override(doc, "register.count"), InvalidInput);
  CHECK_THROWS_AS(apply_override(doc, "=3"), InvalidInput);
  CHECK_THROWS_AS(apply_override(doc, "register.count.x=3"), InvalidInput);
  CHECK_THROWS_AS(apply_override(doc, "readout.caged_distribution.9=1"), InvalidInput);
}

TEST_CASE("register construction") {
  const auto& d = builtin_defaults();
  const auto single = register_from_json(json::object(), d);
  CHECK(single.size() == 1);
  CHECK(single.species.name == "P31");

  const auto fig = register_from_json(json::parse(R"({"separation_hz": 45e6, "count": 3})"), d);
  CHECK(std::abs(single_quantum_splitting(fig, 0).hz() - 45e6) < 1e-3);

  const auto pos = register_from_json(json::parse(R"({"positions_m": [0, 3e-9, 7e-9], "gradient_T_per_m": 1e5})"), d);
  CHECK(pos.size() == 3);
  CHECK(pos.positions_m[2] == 7e-9);

  CHECK_THROWS_AS(register_from_json(json::parse(R"({"separation_hz": 45e6, "gradient_T_per_m": 1, "count": 3})"), d),
                  InvalidInput);
  CHECK_THROWS_AS(register_from_json(json::parse(R"({"positions_m": [0, 1e-9], "count": 3})"), d), InvalidInput);
  CHECK_THROWS_AS(register_from_json(json::parse(R"({"species": "Xe"})"), d), InvalidInput);
  CHECK_THROWS_AS(register_from_json(json::parse(R"({"positions_m": [0, 0]})"), d), InvalidInput);
}

TEST_CASE("scenario construction") {
  CHECK_THROWS_AS(make_scenario(Command::spectrum, config("plan_p31_45mhz.json")), InvalidInput);
  const auto s = make_scenario(Command::plan, config("plan_p31_45mhz.json"));
  CHECK(s.reg.size() == 3);
  CHECK(s.wants("csv"));
  auto doc = config("plan_p31_45mhz.json");
  doc["output"]["formats"] = {"json"};
  doc["constants"]["g_electron"] = 2.0;
  const auto t = make_scenario(Command::plan, doc);
  CHECK(!t.wants("svg"));
  CHECK(t.reg.constants.g_electron == 2.0);
  doc["bogus"] = 1;
  CHECK_THROWS_AS(make_scenario(Command::plan, doc), InvalidInput);
  CHECK(command_from_string("thermal") == Command::thermal);
  CHECK_THROWS_AS(command_from_string("fly"), InvalidInput);
}

TEST_CASE("scenario outcomes and exit codes") {
  const auto eq3 = run_scenario(make_scenario(Command::gates, json::parse(R"({"gates": {"check": "eq3"}})")));
  CHECK(eq3.exit_code == kExitOk);
  CHECK(eq3.report["eq3"]["agree"] == true);
  CHECK(eq3.report["eq3"]["fidelity"] == "1.0000000");

  CHECK(run_scenario(make_scenario(Command::plan, config("plan_p31_45mhz.json"))).exit_code == kExitOk);
  const auto n4 = run_scenario(make_scenario(Command::plan, config("plan_p31_45mhz_n4.json")));
  CHECK(n4.exit_code == kExitInfeasible);
  CHECK(n4.report["plan"]["conflicts"].size() == 1);

  const auto spec = run_scenario(make_scenario(Command::spectrum, config("default.json")));
  CHECK(spec.report["energies"].size() == 8);
  bool has_energies = false;
  for (const auto& a : spec.artifacts) has_energies = has_energies || a.name == "energies.csv";
  CHECK(has_energies);

  const auto dry = derived_parameters(make_scenario(Command::plan, config("plan_p31_55mhz.json")));
  CHECK(dry["sites"].size() == 5);
  CHECK(dry["coupling_hz"].size() == 5);
  CHECK(dry["coupling_hz"][0][1].get<double>() > 2e6);

  // Identical inputs give identical outputs.
  const auto r1 = run_scenario(make_scenario(Command::readout, config("readout.json")));
  const auto r2 = run_scenario(make_scenario(Command::readout, config("readout.json")));
  CHECK(r1.report.dump() == r2.report.dump());

  json missing = config("transfer.json");
  missing["transfer"].erase("hop_speed_m_per_s");
  CHECK_THROWS_AS(run_scenario(make_scenario(Command::transfer, missing)), InvalidInput);
}

TEST_CASE("error classification") {
  const auto code = [](auto thrower) {
    try {
      thrower();
    } catch (...) {
      return classify(std::current_exception()).exit_code;
    }
    return -1;
  };
  CHECK(code([] { throw InvalidInput("x"); }) == kExitConfig);
  CHECK(code([] { throw Infeasible("x"); }) == kExitInfeasible);
  CHECK(code([] { throw DimensionLimit("x"); }) == kExitDimension);
  CHECK(code([] { throw NumericalFailure("x"); }) == kExitNumerical);
  CHECK(code([] { const auto bad = json::parse("{"); (void)bad; }) == kExitConfig);
  const auto j = error_json({kExitDimension, "dimension_limit", "too big"});
  CHECK(j["error"]["exit_code"] == 4);
}

TEST_CASE("artifacts honour the format filter") {
  const auto dir = std::filesystem::temp_directory_path() / "peapod_cli_formats";
  std::filesystem::remove_all(dir);
  auto doc = config("default.json");
  doc["output"] = {{"dir", dir.string()}, {"formats", {"csv"}}};
  const auto s = make_scenario(Command::spectrum, doc);
  const auto files = write_outcome(s, run_scenario(s));
  for (const auto& f : files) CHECK(std::filesystem::path(f).extension() == ".csv");
  CHECK(std::filesystem::exists(dir / "energies.csv"));
  CHECK(!std::filesystem::exists(dir / "lines.svg"));
  std::filesystem::remove_all(dir);
}
