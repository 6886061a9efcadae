#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "opplab/acceptance.hpp"
#include "opplab/scalar.hpp"

#include <fstream>

using namespace opplab;
using nlohmann::json;

#ifndef OPPLAB_SOURCE_DIR
#error "OPPLAB_SOURCE_DIR must be defined"
#endif

TEST_CASE("shipped config equals the built-in default") {
    std::ifstream in(std::string(OPPLAB_SOURCE_DIR) + "/config/battery.json");
    REQUIRE(in);
    CHECK(json::parse(in) == default_battery_config());
}

TEST_CASE("default config covers every experiment once, ids 1 to 10") {
    json cfg = default_battery_config();
    REQUIRE(cfg["experiments"].size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(cfg["experiments"][i]["params"]["id"] == i + 1);
    CHECK(experiment_names().size() == 10);
}

TEST_CASE("resolve fills defaults and rejects bad layouts") {
    json r = resolve_battery_config(json{{"experiments", {{{"name", "schedule"}, {"params", {{"instances", 5}}}}}}});
    CHECK(r["experiments"][0]["params"]["instances"] == 5);
    CHECK(r["experiments"][0]["params"]["tolerance"] == 1e-9);
    CHECK_THROWS_AS(resolve_battery_config(json::object()), DomainError);
    CHECK_THROWS_AS(resolve_battery_config(json{{"experiments", {{{"params", json::object()}}}}}), DomainError);
    CHECK_THROWS_AS(resolve_battery_config(json{{"experiments", {{{"name", "nonesuch"}}}}}), DomainError);
    CHECK_THROWS_AS(resolve_battery_config(json{{"experiments", {{{"name", "schedule"}, {"params", {{"typo", 1}}}}}}}),
                    DomainError);
}

TEST_CASE("empty experiment list gives an empty passing summary") {
    auto s = run_battery(json{{"experiments", json::array()}});
    CHECK(s.results.empty());
    CHECK(s.all_pass());
}

json small_config() {
    return json{{"experiments",
                 {{{"name", "duality"}, {"params", {{"triples", 200}}}},
                  {{"name", "schedule"}, {"params", {{"instances", 100}}}},
                  {{"name", "integral_form"}, {"params", {{"instances", 5}}}}}}};
}

TEST_CASE("small battery passes and one broken tolerance fails exactly one experiment") {
    auto ok = run_battery(small_config());
    REQUIRE(ok.results.size() == 3);
    CHECK(ok.all_pass());

    json broken = small_config();
    broken["experiments"][0]["params"]["float_tolerance"] = -1;
    auto bad = run_battery(broken);
    int fails = 0;
    for (const auto& r : bad.results) fails += !r.pass;
    CHECK(fails == 1);
    CHECK_FALSE(bad.results[0].pass);
}

TEST_CASE("reports are reproducible") {
    CHECK(run_battery(small_config()).to_json().dump() == run_battery(small_config()).to_json().dump());
}
