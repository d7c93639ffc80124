#include <doctest.h>

#include "mgmac/scenario.hpp"

#include <filesystem>

using namespace mgmac;
using nlohmann::json;

namespace {

std::string scenario_path(const std::string& file) {
    return (std::filesystem::path(MGMAC_SCENARIO_DIR) / file).string();
}

std::string config_error(const json& j) {
    try {
        parse_scenario(j);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("shipped scenarios parse and echo back to themselves") {
    for (const char* f : {"paper_grid.json", "random25.json", "single_link.json", "chain6.json", "grid3.json"}) {
        CAPTURE(f);
        const ScenarioConfig c = load_scenario(scenario_path(f));
        const json echo = c.to_json();
        CHECK(parse_scenario(echo).to_json() == echo);
    }
}

TEST_CASE("overrides address nested fields and parse values as JSON") {
    const ScenarioConfig c =
        load_scenario(scenario_path("chain6.json"), {"radio.bands=3", "schedule.scheduler=qcsma", "name=x"});
    CHECK(c.bands == 3);
    CHECK(c.scheduler == SchedulerKind::Qcsma);
    CHECK(c.name == "x");
    json j = json::object();
    CHECK_THROWS_AS(apply_override(j, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "=3"), ConfigError);
}

TEST_CASE("validation errors name the field") {
    CHECK(config_error({{"radio", {{"bands", 0}}}}).find("radio.bands") != std::string::npos);
    CHECK(config_error({{"radio", {{"colour", 1}}}}).find("radio.colour") != std::string::npos);
    CHECK(config_error({{"unknown", 1}}).find("unknown") != std::string::npos);
    CHECK(config_error({{"schedule", {{"engine", "async"}, {"scheduler", "mw"}}}}) != "");
    CHECK(config_error({{"traffic", {{"basis", "sideways"}}}}).find("traffic.basis") != std::string::npos);
}

TEST_CASE("small instances build with the expected bound and region scale") {
    const ScenarioConfig c = load_scenario(scenario_path("chain6.json"));
    const Instance inst = build_instance(c);
    CHECK(inst.net.links.size() == 12);
    CHECK(inst.params.exact);
    CHECK(inst.bounds.mu == doctest::Approx(18));
    CHECK(inst.region_scale == doctest::Approx(0.5));
    // region_mu: rate = load · s* / μ on every hop
    for (double r : inst.rates) CHECK(r == doctest::Approx(c.load * 0.5 / 18));

    ScenarioConfig abs = c;
    abs.basis = LoadBasis::Absolute;
    CHECK_THROWS_AS(rates_for_load(abs, build_instance(abs), 1.5), ConfigError);
}

TEST_CASE("a run is a pure function of the config and seed") {
    ScenarioConfig c = load_scenario(scenario_path("grid3.json"));
    c.slots = 2000;
    const Instance inst = build_instance(c);
    const RunOutput a = run_scenario(c, inst, inst.rates, 9);
    const RunOutput b = run_scenario(c, inst, inst.rates, 9);
    CHECK(a.metrics.to_json(true) == b.metrics.to_json(true));
    const RunOutput other = run_scenario(c, inst, inst.rates, 10);
    CHECK(other.metrics.to_json(true) != a.metrics.to_json(true));
}
