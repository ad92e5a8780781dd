#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace resroute;
using testutil::data_path;

TEST_CASE("desk instance loads and validates") {
    Scenario sc = load_scenario(data_path("desk_two_island.json"));
    ValidationReport vr = validate(sc);
    INFO(vr.to_string());
    CHECK(vr.pass());
    CHECK(sc.horizon == 6);
    CHECK(sc.max_travel == 2);
    CHECK(sc.buses.size() == 12);
    CHECK(sc.branches.size() == 10);
    CHECK(sc.ess_buses.size() == 3);
    CHECK(sc.mess_types.size() == 2);
    CHECK(islands(sc).size() == 2);
}

TEST_CASE("full benchmark instance matches its headline counts") {
    Scenario sc = load_scenario(data_path("ieee123_mess.json"));
    ValidationReport vr = validate(sc);
    INFO(vr.to_string());
    REQUIRE(vr.pass());
    CHECK(sc.buses.size() == 123);
    CHECK(sc.branches.size() == 118);
    CHECK(sc.ess_buses.size() == 19);
    CHECK(sc.generators.size() == 19);
    CHECK(sc.loads.size() == 85);
    CHECK(sc.horizon == 10);
    CHECK(sc.max_travel == 3);
    CHECK(sc.transport_arcs.size() == 40);
    long total = sc.total_units(1) + sc.total_units(2);
    CHECK(total == 40);
    // forest arithmetic: |E| = |N| - islands
    CHECK(sc.branches.size() == sc.buses.size() - islands(sc).size());
    // every unit's initial charge sits inside its per-unit capacity band
    for (const auto& e : sc.ess_buses)
        for (const auto& [tid, socs] : e.unit_initial_soc) {
            const MessType* mt = sc.find_type(tid);
            for (double s : socs) {
                CHECK(s >= mt->soc_min_unit);
                CHECK(s <= mt->soc_max_unit);
            }
        }
}

TEST_CASE("partition property holds on accepted scenarios") {
    Scenario sc = load_scenario(data_path("ieee123_mess.json"));
    size_t nl = 0, ng = 0, ne = 0;
    for (const auto& b : sc.buses) {
        if (b.kind == BusKind::Load) ++nl;
        if (b.kind == BusKind::Generator) ++ng;
        if (b.kind == BusKind::Ess) ++ne;
    }
    CHECK(nl + ng + ne == sc.buses.size());
    CHECK(nl == sc.loads.size());
    CHECK(ng == sc.generators.size());
    CHECK(ne == sc.ess_buses.size());
}

TEST_CASE("self-loop transport arc is rejected") {
    Scenario sc = testutil::ess_toy();
    sc.transport_arcs[0].to = sc.transport_arcs[0].from;
    ValidationReport vr = validate(sc);
    CHECK_FALSE(vr.pass());
    bool named = false;
    for (const auto& v : vr.violations)
        if (v.message.find("self-loop") != std::string::npos) named = true;
    CHECK(named);
}

TEST_CASE("max travel time must stay below the horizon") {
    Scenario sc = testutil::ess_toy();
    sc.max_travel = sc.horizon;
    ValidationReport vr = validate(sc);
    CHECK_FALSE(vr.pass());
}

TEST_CASE("revalidation is idempotent") {
    Scenario sc = load_scenario(data_path("desk_two_island.json"));
    CHECK(validate(sc).pass());
    CHECK(validate(sc).pass());
}

TEST_CASE("island decomposition") {
    SECTION("single connected tree") {
        Scenario sc = testutil::two_bus();
        auto comps = islands(sc);
        REQUIRE(comps.size() == 1);
        CHECK(comps[0] == std::vector<Index>{1, 2});
    }
    SECTION("edgeless scenario gives singletons") {
        Scenario sc;
        sc.horizon = 1;
        sc.buses = {{7, BusKind::Load}, {2, BusKind::Load}, {5, BusKind::Load}};
        auto comps = islands(sc);
        REQUIRE(comps.size() == 3);
        CHECK(comps[0] == std::vector<Index>{2});
        CHECK(comps[1] == std::vector<Index>{5});
        CHECK(comps[2] == std::vector<Index>{7});
    }
    SECTION("three sections with open ties") {
        // 9 buses, 6 branches, ties left open between sections
        Scenario sc;
        sc.horizon = 1;
        for (Index b = 1; b <= 9; ++b)
            sc.buses.push_back({b, b % 3 == 1 ? BusKind::Generator : BusKind::Load});
        sc.branches = {{1, 2, 0.01, 0.01}, {2, 3, 0.01, 0.01}, {4, 5, 0.01, 0.01},
                       {5, 6, 0.01, 0.01}, {7, 8, 0.01, 0.01}, {8, 9, 0.01, 0.01}};
        auto comps = islands(sc);
        REQUIRE(comps.size() == 3);
        CHECK(comps[1] == std::vector<Index>{4, 5, 6});
    }
}

TEST_CASE("default reference bus is the smallest-id generator per island") {
    Scenario sc = load_scenario(data_path("desk_two_island.json"));
    REQUIRE(sc.reference_buses.size() == 2);
    CHECK(sc.reference_buses[0] == 1);
    CHECK(sc.reference_buses[1] == 7);
}

TEST_CASE("transport tariff follows the shipment-size rule") {
    Scenario sc = load_scenario(data_path("ieee123_mess.json"));
    // 0.8 per MWh of load served, 10% of the unit's capacity, +10% per extra step
    CHECK_THAT(sc.transport_unit_cost(1, 1), Catch::Matchers::WithinAbs(0.8 * 0.1 * 0.25, 1e-12));
    CHECK_THAT(sc.transport_unit_cost(1, 2),
               Catch::Matchers::WithinAbs(0.8 * 0.1 * 0.25 * 1.1, 1e-12));
    CHECK_THAT(sc.transport_unit_cost(2, 3),
               Catch::Matchers::WithinAbs(0.8 * 0.1 * 0.05 * 1.2, 1e-12));
}

TEST_CASE("missing scenario file raises an error naming the path") {
    try {
        load_scenario("/nonexistent/path.json");
        FAIL("expected an exception");
    } catch (const std::exception& ex) {
        CHECK(std::string(ex.what()).find("/nonexistent/path.json") != std::string::npos);
    }
}
