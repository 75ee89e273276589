#include "gclaim/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gclaim {

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& origin, const std::string& what) {
    throw SchemaError(origin + ": " + what);
}

/// Numeric fields accept strings ("1/3", "0.5") or plain JSON numbers.
std::string number_field(const json& j, const std::string& origin,
                         const std::string& field) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    if (j.is_number_float()) {
        std::ostringstream os;
        os.precision(17);
        os << j.get<double>();
        return os.str();
    }
    schema_fail(origin, "field '" + field + "' must be a number or numeric string");
}

const json& require(const json& j, const std::string& origin, const std::string& field) {
    auto it = j.find(field);
    if (it == j.end()) schema_fail(origin, "missing field '" + field + "'");
    return *it;
}

StateMatcher parse_matcher(const json& j, const std::string& origin) {
    StateMatcher m;
    if (j.contains("date")) m.date = j.at("date").get<int>();
    if (j.contains("node")) m.node = j.at("node").get<int>();
    if (j.contains("history")) {
        if (!j.at("history").is_array())
            schema_fail(origin, "'history' must be an array of joint actions");
        std::vector<std::vector<int>> h;
        for (const json& row : j.at("history")) h.push_back(row.get<std::vector<int>>());
        m.history = std::move(h);
    }
    return m;
}

std::vector<std::string> parse_values(const json& j, const std::string& origin,
                                      const std::string& field) {
    if (!j.is_array()) schema_fail(origin, "'" + field + "' must be an array");
    std::vector<std::string> out;
    for (const json& v : j) out.push_back(number_field(v, origin, field));
    return out;
}

GameConfig parse_game(const json& j, const std::string& origin) {
    GameConfig gc;
    gc.players = require(j, origin, "players").get<int>();
    if (gc.players < 1) schema_fail(origin, "'players' must be positive");
    const json& actions = require(j, origin, "actions");
    if (!actions.is_array()) schema_fail(origin, "'actions' must be an array");
    for (const json& a : actions) {
        if (a.is_number_integer()) {
            gc.actions.push_back(a.get<int>());
            gc.action_labels.emplace_back();
        } else if (a.is_array()) {
            std::vector<std::string> labels = a.get<std::vector<std::string>>();
            gc.actions.push_back(static_cast<int>(labels.size()));
            gc.action_labels.push_back(std::move(labels));
        } else {
            schema_fail(origin, "'actions' entries must be counts or label arrays");
        }
    }
    if (static_cast<int>(gc.actions.size()) != gc.players)
        schema_fail(origin, "'actions' must list one entry per player");
    for (int c : gc.actions)
        if (c < 1) schema_fail(origin, "action sets must be nonempty");
    gc.horizon = require(j, origin, "horizon").get<int>();
    if (gc.horizon < 0) schema_fail(origin, "'horizon' must be nonnegative");
    if (j.contains("terminal"))
        for (const json& t : j.at("terminal")) gc.terminal.push_back(parse_matcher(t, origin));
    const json& payoffs = require(j, origin, "payoffs");
    if (!payoffs.is_array()) schema_fail(origin, "'payoffs' must be an array");
    for (const json& p : payoffs) {
        PayoffRule rule;
        rule.match = parse_matcher(p, origin);
        rule.values = parse_values(require(p, origin, "values"), origin, "values");
        if (static_cast<int>(rule.values.size()) != gc.players)
            schema_fail(origin, "payoff entry must list one value per player");
        gc.payoffs.push_back(std::move(rule));
    }
    if (j.contains("default_payoff")) {
        gc.default_payoff = parse_values(j.at("default_payoff"), origin, "default_payoff");
        if (static_cast<int>(gc.default_payoff->size()) != gc.players)
            schema_fail(origin, "'default_payoff' must list one value per player");
    }
    return gc;
}

TrancheConfig parse_tranches(const json& j, const std::string& origin) {
    TrancheConfig tc;
    tc.decision_dates = require(j, origin, "decision_dates").get<std::vector<int>>();
    if (tc.decision_dates.empty()) schema_fail(origin, "'decision_dates' is empty");
    const json& legs = require(j, origin, "legs");
    if (!legs.is_array() || legs.empty()) schema_fail(origin, "'legs' must be nonempty");
    for (const json& l : legs) {
        LegConfig lc;
        lc.kind = require(l, origin, "kind").get<std::string>();
        lc.style = require(l, origin, "style").get<std::string>();
        if (l.contains("strike"))
            lc.strike = number_field(l.at("strike"), origin, "strike");
        if (l.contains("terminal"))
            lc.terminal = parse_values(l.at("terminal"), origin, "terminal");
        tc.legs.push_back(std::move(lc));
    }
    const json& puts = require(j, origin, "put_payoffs");
    if (!puts.is_array() || puts.size() != legs.size())
        schema_fail(origin, "'put_payoffs' must list one schedule per tranche");
    for (const json& per_tranche : puts) {
        std::vector<PutSchedule> schedules;
        if (!per_tranche.is_array())
            schema_fail(origin, "each put schedule must be an array");
        for (const json& s : per_tranche) {
            PutSchedule ps;
            ps.date = require(s, origin, "date").get<int>();
            const json& vals = require(s, origin, "values");
            if (vals.is_array())
                ps.values = parse_values(vals, origin, "values");
            else
                ps.values = {number_field(vals, origin, "values")};
            schedules.push_back(std::move(ps));
        }
        tc.put_payoffs.push_back(std::move(schedules));
    }
    return tc;
}

/// One pass over the free game tree confirms the payoff rules cover every
/// settlement point (exact arithmetic).
void check_payoff_totality(const ContractConfig& cfg, const std::string& origin) {
    MarketLattice<Rational> lattice = lattice_from_config<Rational>(cfg);
    GameSpec<Rational> game = game_from_config<Rational>(cfg, lattice);
    Coalition everyone = Coalition::all(game.players);
    std::function<void(const GameState&)> walk = [&](const GameState& s) {
        detail::for_each_action_tuple(
            game.action_counts, everyone.members, [&](const JointAction& a) {
                if (game.settles(s, a)) {
                    game.settlement_payoff(s, a); // throws SchemaError on a gap
                    return;
                }
                GameState child{s.date + 1, s.node, s.history};
                child.history.push_back(a);
                walk(child);
                child.node += 1;
                walk(child);
            });
    };
    try {
        walk(root_state());
    } catch (const SchemaError& e) {
        schema_fail(origin, e.what());
    }
}

} // namespace

ContractConfig parse_config(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError(origin + ": top level must be an object");

    ContractConfig cfg;
    cfg.version = require(doc, origin, "version").get<int>();
    if (cfg.version != 1)
        schema_fail(origin, "unsupported config version " + std::to_string(cfg.version));
    if (doc.contains("numeric")) cfg.numeric = doc.at("numeric").get<std::string>();
    if (cfg.numeric != "float" && cfg.numeric != "rational")
        schema_fail(origin, "'numeric' must be float or rational");
    if (doc.contains("budget")) cfg.budget = doc.at("budget").get<std::uint64_t>();

    const json& lj = require(doc, origin, "lattice");
    cfg.lattice.initial_price =
        number_field(require(lj, origin, "initial_price"), origin, "initial_price");
    cfg.lattice.up = number_field(require(lj, origin, "up"), origin, "up");
    cfg.lattice.down = number_field(require(lj, origin, "down"), origin, "down");
    cfg.lattice.accrual = number_field(require(lj, origin, "accrual"), origin, "accrual");
    cfg.lattice.steps = require(lj, origin, "steps").get<int>();
    if (cfg.lattice.steps < 1) schema_fail(origin, "'steps' must be >= 1");

    cfg.mode = require(doc, origin, "mode").get<std::string>();
    if (cfg.mode == "game") {
        cfg.game = parse_game(require(doc, origin, "game"), origin);
        if (cfg.game->horizon > cfg.lattice.steps)
            throw HorizonError(origin + ": game horizon " +
                               std::to_string(cfg.game->horizon) +
                               " exceeds lattice steps " +
                               std::to_string(cfg.lattice.steps));
        check_payoff_totality(cfg, origin);
    } else if (cfg.mode == "tranches") {
        cfg.tranches = parse_tranches(require(doc, origin, "tranches"), origin);
        int prev = 0;
        for (int d : cfg.tranches->decision_dates) {
            if (d <= prev)
                schema_fail(origin, "decision dates must be strictly increasing");
            if (d >= cfg.lattice.steps)
                throw HorizonError(origin + ": decision date " + std::to_string(d) +
                                   " is not before maturity " +
                                   std::to_string(cfg.lattice.steps));
            prev = d;
        }
    } else {
        schema_fail(origin, "'mode' must be game or tranches");
    }
    return cfg;
}

ContractConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        throw ParseError(path + ": empty file");
    return parse_config(text, path);
}

} // namespace gclaim
