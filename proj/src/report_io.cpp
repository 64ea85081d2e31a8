#include "capsim/report_io.h"

#include "capsim/errors.h"
#include "capsim/scenario_io.h"

#include <charconv>
#include <set>
#include <sstream>

namespace capsim {
namespace {

using json = nlohmann::json;

/// Shortest representation that reads back to the same double.
std::string num(double x) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

json term_to_json(const ConversionTerm &term) {
    return {{"kind", to_string(term.kind)},
            {"when", condition_to_json(term.when)},
            {"factor", term.factor},
            {"applies_to", term.applies_to}};
}

json capability_map(const std::map<CentralCapability, double> &values) {
    json out = json::object();
    for (const auto &[c, v] : values) {
        out[std::string(to_string(c))] = v;
    }
    return out;
}

json distributions_json(const StateDistributions &d) {
    return {{"health", d.health}, {"housing", d.housing}, {"registration", d.registration}};
}

json expenses_json(const std::map<Payer, double> &expenses) {
    json out = json::object();
    for (const auto &[payer, amount] : expenses) {
        out[std::string(to_string(payer))] = amount;
    }
    return out;
}

json values_json(const std::set<ValueDimension> &values) {
    json out = json::array();
    for (const auto v : values) {
        out.push_back(to_string(v));
    }
    return out;
}

json group_json(const std::map<std::string, std::map<CentralCapability, double>> &groups) {
    json out = json::object();
    for (const auto &[group, values] : groups) {
        out[group] = capability_map(values);
    }
    return out;
}

// Reading helpers for metrics_from_json.

const json &at(const json &doc, const char *key) {
    if (!doc.is_object() || !doc.contains(key)) {
        throw ParseError(key, "missing key in metrics document");
    }
    return doc[key];
}

CentralCapability capability_key(const std::string &name) {
    if (auto c = try_central_capability(name)) {
        return *c;
    }
    throw ParseError(name, "unknown capability in metrics document");
}

std::map<CentralCapability, double> read_capability_map(const json &doc) {
    std::map<CentralCapability, double> out;
    for (const auto &[name, value] : doc.items()) {
        out[capability_key(name)] = value.get<double>();
    }
    return out;
}

StateDistributions read_distributions(const json &doc) {
    StateDistributions d;
    d.health = at(doc, "health").get<Distribution>();
    d.housing = at(doc, "housing").get<Distribution>();
    d.registration = at(doc, "registration").get<Distribution>();
    return d;
}

std::set<ValueDimension> read_values(const json &doc) {
    std::set<ValueDimension> out;
    for (const auto &v : doc) {
        const auto name = v.get<std::string>();
        const auto dim = try_value_dimension(name);
        if (!dim) {
            throw ParseError(name, "unknown value dimension in metrics document");
        }
        out.insert(*dim);
    }
    return out;
}

std::map<std::string, std::map<CentralCapability, double>> read_groups(const json &doc) {
    std::map<std::string, std::map<CentralCapability, double>> out;
    for (const auto &[group, values] : doc.items()) {
        out[group] = read_capability_map(values);
    }
    return out;
}

} // namespace

nlohmann::json state_to_json(const PersonalState &state) {
    json attributes = json::object();
    for (const auto &[name, value] : state.attributes) {
        attributes[name] = std::visit([](const auto &v) { return json(v); }, value);
    }
    return {{"health", state.health},
            {"housing", to_string(state.housing)},
            {"registration", to_string(state.registration)},
            {"attributes", attributes}};
}

nlohmann::json choice_to_json(const ChoiceFactors &choice) {
    json values = json::object();
    for (const auto &[v, w] : choice.value_prefs()) {
        values[std::string(to_string(v))] = w;
    }
    json needs = json::object();
    for (const auto &[need, u] : choice.need_urgencies()) {
        needs[need.name] = u;
    }
    return {{"value_prefs", values}, {"need_urgencies", needs}};
}

nlohmann::json agent_to_json(const AgentProfile &agent) {
    json factors = json::array();
    for (const auto &term : agent.personal_factors) {
        factors.push_back(term_to_json(term));
    }
    return {{"id", agent.id},
            {"state", state_to_json(agent.state)},
            {"choice", choice_to_json(agent.choice)},
            {"personal_factors", factors}};
}

nlohmann::json run_report_to_json(const RunReport &report) {
    json agents_before = json::array();
    for (const auto &agent : report.initial_agents) {
        agents_before.push_back(agent_to_json(agent));
    }
    json agents_after = json::array();
    for (const auto &agent : report.final_agents) {
        agents_after.push_back(agent_to_json(agent));
    }
    json events = json::array();
    for (const auto &e : report.events) {
        json possible = json::array();
        for (const auto a : e.possible) {
            possible.push_back(index(a));
        }
        json impossible = json::array();
        for (const auto a : e.impossible) {
            impossible.push_back(index(a));
        }
        events.push_back({{"tick", e.tick},
                          {"agent", e.agent},
                          {"before", state_to_json(e.before)},
                          {"after", state_to_json(e.after)},
                          {"choice_before", choice_to_json(e.choice_before)},
                          {"choice_after", choice_to_json(e.choice_after)},
                          {"action", e.action == kNoOp ? json(nullptr) : json(report.actions.at(index(e.action)))},
                          {"feasibility", e.feasibility},
                          {"possible", possible},
                          {"impossible", impossible},
                          {"realised", e.realised}});
    }
    json remaining = json::object();
    for (const auto &[name, left] : report.final_world.remaining) {
        remaining[name] = left;
    }
    json environment = json::object();
    for (const auto &[key, value] : report.final_world.environment) {
        environment[key] = std::visit([](const auto &v) { return json(v); }, value);
    }
    return {{"scenario", report.scenario},
            {"seed", report.seed},
            {"horizon", report.horizon},
            {"aggregation", aggregation_to_json(report.aggregation)},
            {"schedule", report.schedule == Schedule::Ascending ? "ascending" : "shuffled"},
            {"norm_overrides", report.norm_overrides},
            {"actions", report.actions},
            {"initial_agents", agents_before},
            {"final_agents", agents_after},
            {"events", events},
            {"final_world",
             {{"tick", report.final_world.tick},
              {"remaining", remaining},
              {"expenses", expenses_json(report.final_world.expenses)},
              {"environment", environment}}}};
}

std::string trajectory_csv(const RunReport &report) {
    std::ostringstream out;
    out << "tick,agent,health_before,housing_before,registration_before,health_after,"
           "housing_after,registration_after,action,realised,possible_count,impossible_count\n";
    for (const auto &e : report.events) {
        out << e.tick << ',' << e.agent << ',' << e.before.health << ',' << to_string(e.before.housing)
            << ',' << to_string(e.before.registration) << ',' << e.after.health << ','
            << to_string(e.after.housing) << ',' << to_string(e.after.registration) << ','
            << (e.action == kNoOp ? std::string("noop") : report.actions.at(index(e.action))) << ','
            << (e.realised ? 1 : 0) << ',' << e.possible.size() << ',' << e.impossible.size()
            << '\n';
    }
    return out.str();
}

nlohmann::json metrics_to_json(const EquityMetrics &m) {
    json capabilities = json::object();
    for (const auto &[c, cm] : m.capabilities) {
        capabilities[std::string(to_string(c))] = {{"deprivation_ratio", cm.deprivation_ratio},
                                                   {"functioning_rate", cm.functioning_rate},
                                                   {"deprived_agents", cm.deprived_agents},
                                                   {"functioning_agents", cm.functioning_agents}};
    }
    json not_modelled = json::array();
    for (const auto c : m.not_modelled) {
        not_modelled.push_back(to_string(c));
    }
    json norms = json::array();
    for (const auto &n : m.norms) {
        norms.push_back({{"id", n.id},
                         {"kind", to_string(n.kind)},
                         {"enabled", n.enabled},
                         {"promotes", values_json(n.promotes)},
                         {"demotes", values_json(n.demotes)},
                         {"activations", n.activations}});
    }
    json series = json::array();
    for (const auto &snap : m.series) {
        series.push_back({{"tick", snap.tick},
                          {"deprivation", capability_map(snap.deprivation)},
                          {"distributions", distributions_json(snap.distributions)}});
    }
    return {{"scenario", m.scenario},
            {"seed", m.seed},
            {"agents", m.agents},
            {"horizon", m.horizon},
            {"actions", m.actions},
            {"capabilities", capabilities},
            {"not_modelled", not_modelled},
            {"final_distributions", distributions_json(m.final_distributions)},
            {"expenses", expenses_json(m.expenses)},
            {"norms", norms},
            {"deprivation_by_registration", group_json(m.deprivation_by_registration)},
            {"deprivation_by_housing", group_json(m.deprivation_by_housing)},
            {"series", series}};
}

EquityMetrics metrics_from_json(const nlohmann::json &doc) {
    try {
        EquityMetrics m;
        m.scenario = at(doc, "scenario").get<std::string>();
        m.seed = at(doc, "seed").get<std::uint64_t>();
        m.agents = at(doc, "agents").get<std::size_t>();
        m.horizon = at(doc, "horizon").get<std::int64_t>();
        m.actions = at(doc, "actions").get<std::vector<std::string>>();
        for (const auto &[name, cm] : at(doc, "capabilities").items()) {
            CapabilityMetrics out;
            out.deprivation_ratio = at(cm, "deprivation_ratio").get<double>();
            out.functioning_rate = at(cm, "functioning_rate").get<double>();
            out.deprived_agents = at(cm, "deprived_agents").get<std::size_t>();
            out.functioning_agents = at(cm, "functioning_agents").get<std::size_t>();
            m.capabilities[capability_key(name)] = out;
        }
        for (const auto &c : at(doc, "not_modelled")) {
            m.not_modelled.insert(capability_key(c.get<std::string>()));
        }
        m.final_distributions = read_distributions(at(doc, "final_distributions"));
        for (const auto &[name, amount] : at(doc, "expenses").items()) {
            const auto payer = try_payer(name);
            if (!payer) {
                throw ParseError(name, "unknown payer in metrics document");
            }
            m.expenses[*payer] = amount.get<double>();
        }
        for (const auto &n : at(doc, "norms")) {
            NormLedgerEntry entry;
            entry.id = at(n, "id").get<std::string>();
            entry.kind = at(n, "kind").get<std::string>() == "Social" ? NormKind::Social : NormKind::Legal;
            entry.enabled = at(n, "enabled").get<bool>();
            entry.promotes = read_values(at(n, "promotes"));
            entry.demotes = read_values(at(n, "demotes"));
            entry.activations = at(n, "activations").get<std::size_t>();
            m.norms.push_back(std::move(entry));
        }
        m.deprivation_by_registration = read_groups(at(doc, "deprivation_by_registration"));
        m.deprivation_by_housing = read_groups(at(doc, "deprivation_by_housing"));
        for (const auto &snap : at(doc, "series")) {
            TickSnapshot out;
            out.tick = at(snap, "tick").get<std::int64_t>();
            out.deprivation = read_capability_map(at(snap, "deprivation"));
            out.distributions = read_distributions(at(snap, "distributions"));
            m.series.push_back(std::move(out));
        }
        return m;
    } catch (const nlohmann::json::exception &e) {
        throw ParseError("metrics", e.what());
    }
}

std::string series_csv(const EquityMetrics &m) {
    std::ostringstream out;
    out << "tick,metric,category,value\n";
    for (const auto &snap : m.series) {
        for (const auto &[c, ratio] : snap.deprivation) {
            out << snap.tick << ",deprivation," << to_string(c) << ',' << num(ratio) << '\n';
        }
        const std::pair<const char *, const Distribution *> parts[] = {
            {"health", &snap.distributions.health},
            {"housing", &snap.distributions.housing},
            {"registration", &snap.distributions.registration}};
        for (const auto &[metric, dist] : parts) {
            for (const auto &[category, value] : *dist) {
                out << snap.tick << ',' << metric << ',' << category << ',' << num(value) << '\n';
            }
        }
    }
    return out.str();
}

nlohmann::json delta_to_json(const DeltaReport &delta) {
    json capabilities = json::object();
    for (const auto &[c, d] : delta.capabilities) {
        capabilities[std::string(to_string(c))] = {{"deprivation_ratio", d.deprivation_ratio},
                                                   {"functioning_rate", d.functioning_rate},
                                                   {"verdict", to_string(d.verdict)}};
    }
    return {{"capabilities", capabilities},
            {"final_distributions", distributions_json(delta.final_distributions)},
            {"expenses", expenses_json(delta.expenses)}};
}

std::string population_csv(const std::vector<AgentProfile> &agents) {
    std::set<std::string> attributes;
    std::set<NeedDimension> needs;
    for (const auto &agent : agents) {
        for (const auto &[name, value] : agent.state.attributes) {
            attributes.insert(name);
        }
        for (const auto &[need, u] : agent.choice.need_urgencies()) {
            needs.insert(need);
        }
    }
    std::ostringstream out;
    out << "id,health,housing,registration";
    for (const auto &name : attributes) {
        out << ',' << name;
    }
    for (const auto v : kValueDimensions) {
        out << ",value:" << to_string(v);
    }
    for (const auto &need : needs) {
        out << ",need:" << need.name;
    }
    out << ",personal_factors\n";
    for (const auto &agent : agents) {
        out << agent.id << ',' << agent.state.health << ',' << to_string(agent.state.housing) << ','
            << to_string(agent.state.registration);
        for (const auto &name : attributes) {
            out << ',';
            if (auto it = agent.state.attributes.find(name); it != agent.state.attributes.end()) {
                if (const auto *d = std::get_if<double>(&it->second)) {
                    out << num(*d);
                } else {
                    out << std::get<std::string>(it->second);
                }
            }
        }
        for (const auto v : kValueDimensions) {
            out << ',' << num(agent.choice.value_pref(v));
        }
        for (const auto &need : needs) {
            out << ',' << num(agent.choice.urgency(need));
        }
        out << ',' << agent.personal_factors.size() << '\n';
    }
    return out.str();
}

std::string metrics_text(const EquityMetrics &m) {
    std::ostringstream out;
    out << "scenario " << m.scenario << ", seed " << m.seed << ", " << m.agents << " agents, "
        << m.horizon << " ticks\n";
    out << "capabilities:\n";
    for (const auto &[c, cm] : m.capabilities) {
        out << "  " << to_string(c) << ": deprivation " << num(cm.deprivation_ratio) << " ("
            << cm.deprived_agents << "), functioning " << num(cm.functioning_rate) << " ("
            << cm.functioning_agents << ")\n";
    }
    if (!m.not_modelled.empty()) {
        out << "not modelled:";
        for (const auto c : m.not_modelled) {
            out << ' ' << to_string(c);
        }
        out << '\n';
    }
    out << "expenses:\n";
    for (const auto &[payer, amount] : m.expenses) {
        out << "  " << to_string(payer) << ": " << num(amount) << '\n';
    }
    out << "norms:\n";
    for (const auto &n : m.norms) {
        out << "  " << n.id << " (" << to_string(n.kind) << ", "
            << (n.enabled ? "enabled" : "disabled") << "): " << n.activations << " activations\n";
    }
    return out.str();
}

std::string delta_text(const DeltaReport &delta) {
    std::ostringstream out;
    out << "capabilities (b - a):\n";
    for (const auto &[c, d] : delta.capabilities) {
        out << "  " << to_string(c) << ": deprivation " << num(d.deprivation_ratio)
            << ", functioning " << num(d.functioning_rate) << ", " << to_string(d.verdict) << '\n';
    }
    out << "expenses (b - a):\n";
    for (const auto &[payer, amount] : delta.expenses) {
        out << "  " << to_string(payer) << ": " << num(amount) << '\n';
    }
    return out.str();
}

} // namespace capsim
