#include <doctest.h>

#include <fstream>

#include "gclaim/config.hpp"
#include "gclaim/equilibrium.hpp"
#include "gclaim/tranches.hpp"

using namespace gclaim;

namespace {

const std::string kFixtures = GCLAIM_FIXTURE_DIR;

std::string tranche_doc() {
    return R"({
      "version": 1,
      "numeric": "rational",
      "mode": "tranches",
      "lattice": {"initial_price": "4", "up": "2", "down": "1/2", "accrual": "1", "steps": 2},
      "tranches": {
        "decision_dates": [1],
        "legs": [
          {"kind": "call", "style": "european", "strike": "4"},
          {"kind": "put", "style": "european", "strike": "4"}
        ],
        "put_payoffs": [
          [{"date": 1, "values": "1"}],
          [{"date": 1, "values": "0"}]
        ]
      }
    })";
}

} // namespace

TEST_CASE("the bundled dilemma fixture loads and prices correctly") {
    auto cfg = load_config(kFixtures + "/prisoners_dilemma.json");
    CHECK(cfg.mode == "game");
    CHECK(cfg.numeric == "rational");
    REQUIRE(cfg.game.has_value());
    CHECK(cfg.game->players == 2);
    CHECK(cfg.game->actions == std::vector<int>{2, 2});
    CHECK(cfg.game->horizon == 0);

    auto lat = lattice_from_config<Rational>(cfg);
    auto game = game_from_config<Rational>(cfg, lat);
    auto q = martingale_measure(lat);
    auto pi = price_interval(Coalition{{0, 1}}, game, lat, q);
    CHECK(pi.lower == Rational(2));
    CHECK(pi.upper == Rational(2));
}

TEST_CASE("empty and malformed files raise ParseError") {
    CHECK_THROWS_AS(load_config(kFixtures + "/does_not_exist.json"), ParseError);
    CHECK_THROWS_AS(parse_config("", "test"), ParseError);
    CHECK_THROWS_AS(parse_config("{{{", "test"), ParseError);
    CHECK_THROWS_AS(parse_config("[1,2]", "test"), ParseError);
}

TEST_CASE("schema violations carry field diagnostics") {
    try {
        parse_config(R"({"version": 1, "mode": "game",
                         "lattice": {"initial_price": "4", "up": "2", "down": "1/2",
                                     "accrual": "1", "steps": 1}})",
                     "test");
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("game") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config(R"({"version": 2, "mode": "game", "lattice": {}})", "t"),
                    SchemaError);
}

TEST_CASE("tranche dates beyond the lattice horizon raise HorizonError") {
    std::string doc = tranche_doc();
    auto pos = doc.find("[1]");
    doc.replace(pos, 3, "[2]");
    CHECK_THROWS_AS(parse_config(doc, "test"), HorizonError);
}

TEST_CASE("game horizons beyond the lattice raise HorizonError") {
    std::string doc = R"({
      "version": 1, "mode": "game",
      "lattice": {"initial_price": "4", "up": "2", "down": "1/2", "accrual": "1", "steps": 1},
      "game": {"players": 1, "actions": [1], "horizon": 3,
               "payoffs": [], "default_payoff": ["0"]}
    })";
    CHECK_THROWS_AS(parse_config(doc, "test"), HorizonError);
}

TEST_CASE("payoff tables must be total on terminal states") {
    std::string doc = R"({
      "version": 1, "mode": "game",
      "lattice": {"initial_price": "4", "up": "2", "down": "1/2", "accrual": "1", "steps": 1},
      "game": {"players": 2, "actions": [2, 2], "horizon": 0,
               "payoffs": [
                 {"history": [[0, 0]], "values": ["1", "1"]},
                 {"history": [[1, 1]], "values": ["0", "0"]}
               ]}
    })";
    CHECK_THROWS_AS(parse_config(doc, "test"), SchemaError);
}

TEST_CASE("tranche config builds the worked contract") {
    auto cfg = parse_config(tranche_doc(), "test");
    auto lat = lattice_from_config<Rational>(cfg);
    auto q = martingale_measure(lat);
    auto contract = contract_from_config<Rational>(cfg, lat);
    auto val = value_tranches(contract, lat, q);
    CHECK(val.root_value == std::vector<Rational>{2, Rational(2) / 3});
}

TEST_CASE("node-wise put payoff tables are accepted") {
    std::string doc = tranche_doc();
    auto pos = doc.find(R"([{"date": 1, "values": "1"}])");
    doc.replace(pos, std::string(R"([{"date": 1, "values": "1"}])").size(),
                R"([{"date": 1, "values": ["1", "1"]}])");
    auto cfg = parse_config(doc, "test");
    auto lat = lattice_from_config<Rational>(cfg);
    auto contract = contract_from_config<Rational>(cfg, lat);
    CHECK(contract.put_payoffs[0][0] == std::vector<Rational>{1, 1});
}

TEST_CASE("float mode parses the same documents") {
    auto cfg = parse_config(tranche_doc(), "test");
    auto lat = lattice_from_config<double>(cfg);
    auto contract = contract_from_config<double>(cfg, lat);
    auto val = value_tranches(contract, lat, martingale_measure(lat));
    CHECK(val.root_value[0] == doctest::Approx(2.0));
    CHECK(val.root_value[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("action labels survive the round trip") {
    auto cfg = load_config(kFixtures + "/prisoners_dilemma.json");
    auto lat = lattice_from_config<Rational>(cfg);
    auto game = game_from_config<Rational>(cfg, lat);
    REQUIRE(game.action_labels.size() == 2);
    CHECK(game.action_labels[0][1] == "defect");
}
