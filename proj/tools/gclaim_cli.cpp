// Command-line pricer for multi-person game claims on binomial markets.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "gclaim/config.hpp"
#include "gclaim/report.hpp"

namespace {

using namespace gclaim;

struct CliOptions {
    std::string config_path;
    std::string mode_override;
    std::string output = "human";
    std::uint64_t budget = 0; // 0 = take the config's value
    std::string coalition;
    std::string state = "0:0";
    std::string history;
    std::string side = "issuer";
    std::string quotes;
    std::vector<std::string> coalition_quotes;
};

Coalition parse_coalition(const std::string& text, int players) {
    std::vector<int> members;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        int v = std::stoi(item);
        if (v < 1 || v > players)
            throw DomainError("coalition member " + item + " out of range");
        members.push_back(v - 1);
    }
    if (members.empty()) throw DomainError("empty coalition");
    return Coalition{std::move(members)};
}

GameState parse_state(const std::string& state_text, const std::string& history_text) {
    GameState s;
    auto colon = state_text.find(':');
    if (colon == std::string::npos)
        throw DomainError("--state must look like DATE:NODE");
    s.date = std::stoi(state_text.substr(0, colon));
    s.node = std::stoi(state_text.substr(colon + 1));
    if (!history_text.empty()) {
        std::stringstream dates(history_text);
        std::string joint;
        while (std::getline(dates, joint, ';')) {
            JointAction a;
            std::stringstream acts(joint);
            std::string one;
            while (std::getline(acts, one, ',')) a.push_back(std::stoi(one));
            s.history.push_back(std::move(a));
        }
    }
    if (static_cast<int>(s.history.size()) != s.date)
        throw DomainError("--history must list one joint action per elapsed date");
    if (s.node < 0 || s.node > s.date) throw DomainError("state node out of range");
    return s;
}

template <typename N>
std::string vec_str(const std::vector<N>& v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += num_to_string(v[i]);
    }
    return out + ")";
}

template <typename N>
std::string action_name(const GameSpec<N>& game, int player, int action) {
    if (player < static_cast<int>(game.action_labels.size()) &&
        action < static_cast<int>(game.action_labels[player].size()))
        return game.action_labels[player][action];
    return std::to_string(action);
}

void emit(const CliOptions& opt, const std::string& command, const std::string& mode,
          nlohmann::json payload, const std::string& human) {
    if (opt.output == "structured")
        std::cout << wrap_report(command, mode, std::move(payload)).dump(2) << "\n";
    else
        std::cout << human;
}

template <typename N>
std::string profile_text(const GameSpec<N>& game, const StrategyProfile& profile) {
    std::ostringstream os;
    for (std::size_t p = 0; p < profile.size(); ++p) {
        os << "  player " << profile[p].members.label() << ":\n";
        for (const auto& [state, action] : profile[p].choice) {
            os << "    date " << state.date << " node " << state.node << " history [";
            for (std::size_t t = 0; t < state.history.size(); ++t) {
                if (t) os << "; ";
                for (std::size_t i = 0; i < state.history[t].size(); ++i) {
                    if (i) os << ",";
                    os << state.history[t][i];
                }
            }
            os << "] -> ";
            for (std::size_t i = 0; i < action.size(); ++i) {
                if (i) os << ",";
                os << action_name(game, profile[p].members.members[i], action[i]);
            }
            os << "\n";
        }
    }
    return os.str();
}

template <typename N>
int cmd_interval(const ContractConfig& cfg, const CliOptions& opt) {
    auto lattice = lattice_from_config<N>(cfg);
    auto game = game_from_config<N>(cfg, lattice);
    auto measure = martingale_measure(lattice);
    Coalition who = parse_coalition(opt.coalition, game.players);
    GameState at = parse_state(opt.state, opt.history);
    auto pi = price_interval(who, game, lattice, measure, at);
    std::ostringstream os;
    os << "coalition " << who.label() << " at date " << at.date << ", node " << at.node
       << "\n"
       << "no-arbitrage interval: [" << num_to_string(pi.lower) << ", "
       << num_to_string(pi.upper) << "]\n";
    emit(opt, "interval", NumTraits<N>::mode_name(), to_json(pi), os.str());
    return 0;
}

template <typename N>
int cmd_price_game(const ContractConfig& cfg, const CliOptions& opt,
                   std::uint64_t budget) {
    auto lattice = lattice_from_config<N>(cfg);
    auto game = game_from_config<N>(cfg, lattice);
    auto measure = martingale_measure(lattice);
    GameState at = parse_state(opt.state, opt.history);
    auto pricing = price_by_equilibrium(game, lattice, measure, at, budget);
    std::ostringstream os;
    os << "tranche prices (discounted):\n";
    for (std::size_t i = 0; i < pricing.tranche_prices.size(); ++i)
        os << "  tranche " << (i + 1) << ": " << num_to_string(pricing.tranche_prices[i])
           << "\n";
    os << "sum condition: " << (pricing.condition_holds ? "holds" : "FAILS")
       << " (planner max " << num_to_string(pricing.planner_max) << ")\n"
       << "coalitions:\n";
    for (const auto& cp : pricing.coalitions) {
        os << "  " << cp.who.label() << ": ";
        if (cp.additive)
            os << "price " << num_to_string(*cp.price) << " (additive)\n";
        else
            os << "interval [" << num_to_string(cp.lower) << ", "
               << num_to_string(cp.upper) << "] NOT additive\n";
    }
    emit(opt, "price", NumTraits<N>::mode_name(), to_json(pricing), os.str());
    return 0;
}

template <typename N>
int cmd_price_tranches(const ContractConfig& cfg, const CliOptions& opt) {
    auto lattice = lattice_from_config<N>(cfg);
    auto contract = contract_from_config<N>(cfg, lattice);
    auto measure = martingale_measure(lattice);
    auto val = value_tranches(contract, lattice, measure);
    std::ostringstream os;
    os << "tranche prices at time 0 (unique arbitrage prices):\n";
    for (std::size_t i = 0; i < val.root_value.size(); ++i)
        os << "  tranche " << (i + 1) << ": " << num_to_string(val.root_value[i]) << "\n";
    emit(opt, "price", NumTraits<N>::mode_name(), to_json(contract, val), os.str());
    return 0;
}

template <typename N>
int cmd_equilibrium(const ContractConfig& cfg, const CliOptions& opt,
                    std::uint64_t budget) {
    auto lattice = lattice_from_config<N>(cfg);
    auto game = game_from_config<N>(cfg, lattice);
    auto measure = martingale_measure(lattice);
    GameState at = parse_state(opt.state, opt.history);
    StrategyProfile star = find_optimal_equilibrium(game, lattice, measure, at, budget);
    auto rep = coalition_additivity(star, game, lattice, measure, at);
    std::ostringstream os;
    os << "optimal equilibrium found\n"
       << "value vector: " << vec_str(rep.player_values) << "\n"
       << "zero-sum game: " << (rep.zero_sum ? "yes" : "no") << "\n"
       << "sum condition: " << (rep.sum_condition ? "holds" : "FAILS") << " (total "
       << num_to_string(rep.profile_total) << " vs planner max "
       << num_to_string(rep.planner_max) << ")\n"
       << "coalition additivity: " << (rep.additivity_ok ? "holds" : "FAILS") << "\n";
    for (const auto& ca : rep.coalitions) {
        os << "  " << ca.who.label() << ": interval [" << num_to_string(ca.lower) << ", "
           << num_to_string(ca.upper) << "], member sum " << num_to_string(ca.member_sum)
           << (ca.additive ? "" : "  <- violates additivity") << "\n";
    }
    os << "profile:\n" << profile_text(game, star);
    nlohmann::json payload;
    payload["equilibrium"] = to_json(star);
    payload["additivity"] = to_json(rep);
    emit(opt, "equilibrium", NumTraits<N>::mode_name(), std::move(payload), os.str());
    return 0;
}

template <typename N>
void hedge_text(const HedgeNode<N>& node, int indent, std::ostringstream& os) {
    std::string pad(indent * 2, ' ');
    os << pad << "date " << node.state.date << " node " << node.state.node << ": wealth "
       << num_to_string(node.wealth) << " (target " << num_to_string(node.target)
       << ")\n";
    for (const auto& br : node.branches) {
        os << pad << "  action (";
        for (std::size_t i = 0; i < br.action.size(); ++i) {
            if (i) os << ",";
            os << br.action[i];
        }
        if (br.settles) {
            os << "): settles, payoff " << num_to_string(br.payoff) << "\n";
        } else {
            os << "): hold " << num_to_string(br.bond_units) << " bonds, "
               << num_to_string(br.stock_units) << " stock\n";
            hedge_text(*br.down, indent + 2, os);
            hedge_text(*br.up, indent + 2, os);
        }
    }
}

template <typename N>
int cmd_hedge(const ContractConfig& cfg, const CliOptions& opt) {
    auto lattice = lattice_from_config<N>(cfg);
    auto game = game_from_config<N>(cfg, lattice);
    auto measure = martingale_measure(lattice);
    Coalition who = parse_coalition(opt.coalition, game.players);
    GameState at = parse_state(opt.state, opt.history);
    HedgePortfolio<N> plan;
    if (opt.side == "issuer") {
        auto sigma = minimax_opponent_strategy(who, game, lattice, measure, at);
        plan = superhedge_issuer(who, sigma, game, lattice, measure, at);
    } else if (opt.side == "holder") {
        auto tau = maximin_own_strategy(who, game, lattice, measure, at);
        plan = superhedge_holder(who, tau, game, lattice, measure, at);
    } else {
        throw DomainError("--side must be issuer or holder");
    }
    std::ostringstream os;
    os << opt.side << " super-hedge for coalition " << who.label() << "\n"
       << "initial discounted wealth: " << num_to_string(plan.initial_wealth) << "\n";
    hedge_text(*plan.root, 0, os);
    emit(opt, "hedge", NumTraits<N>::mode_name(), to_json(plan), os.str());
    return 0;
}

template <typename N>
int cmd_value_tranches(const ContractConfig& cfg, const CliOptions& opt) {
    auto lattice = lattice_from_config<N>(cfg);
    auto contract = contract_from_config<N>(cfg, lattice);
    auto measure = martingale_measure(lattice);
    auto val = value_tranches(contract, lattice, measure);
    std::ostringstream os;
    for (std::size_t l = 0; l < val.at_date.size(); ++l) {
        os << "decision date " << contract.decision_dates[l] << ":\n";
        for (std::size_t node = 0; node < val.at_date[l].size(); ++node) {
            const auto& rep = val.at_date[l][node];
            os << "  node " << node << ": continuation " << vec_str(rep.continuation)
               << " sum " << num_to_string(rep.continuation_sum) << " | value "
               << vec_str(rep.value) << " | puts {";
            for (std::size_t k = 0; k < rep.putters.size(); ++k) {
                if (k) os << ",";
                os << rep.putters[k] + 1;
            }
            os << "}" << (rep.all_put_boundary ? " (all-put boundary)" : "") << "\n";
        }
    }
    os << "value at time 0: " << vec_str(val.root_value) << "\n";
    emit(opt, "value-tranches", NumTraits<N>::mode_name(), to_json(contract, val),
         os.str());
    return 0;
}

template <typename N>
int cmd_check_arbitrage(const ContractConfig& cfg, const CliOptions& opt) {
    auto lattice = lattice_from_config<N>(cfg);
    auto game = game_from_config<N>(cfg, lattice);
    auto measure = martingale_measure(lattice);
    GameState at = parse_state(opt.state, opt.history);

    ArbitrageCheckReport rep;
    for (const Coalition& a : all_coalitions(game.players)) {
        N lo = lower_price(a, game, lattice, measure, at);
        N hi = upper_price(a, game, lattice, measure, at);
        rep.bounds.push_back(CoalitionBounds{
            a, parse_rational(num_to_string(lo)), parse_rational(num_to_string(hi))});
    }
    rep.verdict = fourier_motzkin(coalition_price_system(game.players, rep.bounds));

    if (!opt.quotes.empty()) {
        std::vector<Rational> quoted;
        std::stringstream ss(opt.quotes);
        std::string item;
        while (std::getline(ss, item, ',')) quoted.push_back(parse_rational(item));
        if (static_cast<int>(quoted.size()) != game.players)
            throw DomainError("--quotes must list one price per tranche");
        std::map<Coalition, Rational> overrides;
        for (const std::string& spec : opt.coalition_quotes) {
            auto eq = spec.find('=');
            if (eq == std::string::npos)
                throw DomainError("--coalition-quote must look like 1,2=PRICE");
            overrides[parse_coalition(spec.substr(0, eq), game.players)] =
                parse_rational(spec.substr(eq + 1));
        }
        rep.quotes = classify_quotes(rep.bounds, quoted, overrides);
    }

    std::ostringstream os;
    os << "coalition intervals at date " << at.date << ", node " << at.node << ":\n";
    for (const auto& cb : rep.bounds)
        os << "  " << cb.who.label() << ": [" << num_to_string(cb.lower) << ", "
           << num_to_string(cb.upper) << "]\n";
    if (rep.verdict.feasible) {
        os << "feasible tranche price vectors exist; witness "
           << vec_str(rep.verdict.witness) << "\n";
    } else {
        os << "feasible region: EMPTY (conflicting constraints:";
        for (const auto& label : rep.verdict.conflict) os << " " << label;
        os << ")\n";
    }
    if (rep.quotes) {
        if (rep.quotes->arbitrage_free()) {
            os << "quoted prices: arbitrage-free\n";
        } else {
            for (const auto& v : rep.quotes->interval_violations) {
                os << "quote violates " << v.who.label() << " interval ["
                   << num_to_string(v.lower) << ", " << num_to_string(v.upper)
                   << "] with total " << num_to_string(v.quoted_total) << ":"
                   << (v.issuer_side ? " issuer's arbitrage" : "")
                   << (v.holder_side ? " holder's arbitrage" : "") << "\n";
            }
            for (const auto& v : rep.quotes->reselling_violations) {
                os << "reselling arbitrage on " << v.who.label() << ": coalition quote "
                   << num_to_string(v.coalition_quote) << " vs member sum "
                   << num_to_string(v.member_sum) << "\n";
            }
        }
    }
    emit(opt, "check-arbitrage", NumTraits<N>::mode_name(), to_json(rep), os.str());
    return rep.verdict.feasible ? 0 : 5;
}

template <typename N>
int run_command(const std::string& command, const ContractConfig& cfg,
                const CliOptions& opt) {
    std::uint64_t budget = opt.budget ? opt.budget : cfg.budget;
    if (command == "price")
        return cfg.mode == "tranches" ? cmd_price_tranches<N>(cfg, opt)
                                      : cmd_price_game<N>(cfg, opt, budget);
    if (command == "value-tranches") {
        if (cfg.mode != "tranches")
            throw SchemaError("value-tranches needs a tranches-mode config");
        return cmd_value_tranches<N>(cfg, opt);
    }
    if (cfg.mode != "game")
        throw SchemaError("command '" + command + "' needs a game-mode config");
    if (command == "interval") return cmd_interval<N>(cfg, opt);
    if (command == "equilibrium") return cmd_equilibrium<N>(cfg, opt, budget);
    if (command == "hedge") return cmd_hedge<N>(cfg, opt);
    if (command == "check-arbitrage") return cmd_check_arbitrage<N>(cfg, opt);
    throw DomainError("unknown command " + command);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pricing and equilibrium analysis of multi-person game claims"};
    app.require_subcommand(1);

    CliOptions opt;
    for (const char* name : {"price", "interval", "equilibrium", "hedge",
                             "value-tranches", "check-arbitrage"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config_path, "contract config file")->required();
        sub->add_option("--mode", opt.mode_override, "numeric mode: float|rational");
        sub->add_option("--budget", opt.budget, "enumeration budget");
        sub->add_option("--state", opt.state, "evaluation state DATE:NODE");
        sub->add_option("--history", opt.history,
                        "joint actions per elapsed date, e.g. 0,1;1,0");
        sub->add_option("--output", opt.output, "human|structured");
    }
    app.get_subcommand("interval")->add_option("--coalition", opt.coalition)->required();
    app.get_subcommand("hedge")->add_option("--coalition", opt.coalition)->required();
    app.get_subcommand("hedge")->add_option("--side", opt.side, "issuer|holder");
    app.get_subcommand("check-arbitrage")->add_option("--quotes", opt.quotes);
    app.get_subcommand("check-arbitrage")
        ->add_option("--coalition-quote", opt.coalition_quotes);

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        gclaim::ContractConfig cfg = gclaim::load_config(opt.config_path);
        std::string mode = opt.mode_override.empty() ? cfg.numeric : opt.mode_override;
        if (mode == "rational")
            return run_command<gclaim::Rational>(command, cfg, opt);
        if (mode == "float") return run_command<double>(command, cfg, opt);
        throw gclaim::SchemaError("numeric mode must be float or rational");
    } catch (const gclaim::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gclaim::SchemaError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gclaim::HorizonError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gclaim::BudgetExceeded& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 3;
    } catch (const gclaim::ZeroSumViolation& e) {
        std::cerr << "zero-sum condition violated: " << e.what() << "\n";
        return 4;
    } catch (const gclaim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
