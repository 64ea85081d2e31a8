#include "capsim/domain.h"

#include "capsim/errors.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace capsim {
namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view tag,
                           const std::array<std::pair<std::string_view, Enum>, N> &table) {
    const auto key = normalize_tag(tag);
    for (const auto &[name, value] : table) {
        if (normalize_tag(name) == key) {
            return value;
        }
    }
    return std::nullopt;
}

constexpr std::array<std::pair<std::string_view, CentralCapability>, 24> kCapabilityNames{{
    {"Life", CentralCapability::Life},
    {"BodilyHealth", CentralCapability::BodilyHealth},
    {"BodilyIntegrity", CentralCapability::BodilyIntegrity},
    {"SensesImaginationThought", CentralCapability::SensesImaginationThought},
    {"Emotions", CentralCapability::Emotions},
    {"PracticalReason", CentralCapability::PracticalReason},
    {"Affiliation", CentralCapability::Affiliation},
    {"OtherSpecies", CentralCapability::OtherSpecies},
    {"Play", CentralCapability::Play},
    {"ControlOverEnvironment", CentralCapability::ControlOverEnvironment},
    // aliases
    {"health", CentralCapability::BodilyHealth},
    {"integrity", CentralCapability::BodilyIntegrity},
    {"senses", CentralCapability::SensesImaginationThought},
    {"senses_imagination_and_thought", CentralCapability::SensesImaginationThought},
    {"imagination", CentralCapability::SensesImaginationThought},
    {"thought", CentralCapability::SensesImaginationThought},
    {"emotion", CentralCapability::Emotions},
    {"reason", CentralCapability::PracticalReason},
    {"other_species_relations", CentralCapability::OtherSpecies},
    {"control", CentralCapability::ControlOverEnvironment},
    {"control_over_ones_environment", CentralCapability::ControlOverEnvironment},
    {"control_over_one's_environment", CentralCapability::ControlOverEnvironment},
    {"environment_control", CentralCapability::ControlOverEnvironment},
    {"leisure", CentralCapability::Play},
}};

constexpr std::array<std::pair<std::string_view, ValueDimension>, 10> kValueNames{{
    {"SelfDirection", ValueDimension::SelfDirection},
    {"Stimulation", ValueDimension::Stimulation},
    {"Hedonism", ValueDimension::Hedonism},
    {"Achievement", ValueDimension::Achievement},
    {"Power", ValueDimension::Power},
    {"Security", ValueDimension::Security},
    {"Conformity", ValueDimension::Conformity},
    {"Tradition", ValueDimension::Tradition},
    {"Benevolence", ValueDimension::Benevolence},
    {"Universalism", ValueDimension::Universalism},
}};

constexpr std::array<std::pair<std::string_view, Housing>, 5> kHousingNames{{
    {"Roofless", Housing::Roofless},
    {"Houseless", Housing::Houseless},
    {"Insecure", Housing::Insecure},
    {"Inadequate", Housing::Inadequate},
    {"Housed", Housing::Housed},
}};

constexpr std::array<std::pair<std::string_view, Registration>, 3> kRegistrationNames{{
    {"Registered", Registration::Registered},
    {"InProcess", Registration::InProcess},
    {"NonRegistered", Registration::NonRegistered},
}};

constexpr std::array<std::pair<std::string_view, Payer>, 2> kPayerNames{{
    {"Healthcare", Payer::Healthcare},
    {"SocialServices", Payer::SocialServices},
}};

void check_weight(double w, const char *what) {
    if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
        throw std::out_of_range(std::string(what) + " must be in [0,1], got " + std::to_string(w));
    }
}

} // namespace

std::vector<NeedDimension> baseline_needs() {
    return {{"Shelter"}, {"Food"}, {"PainRelief"}, {"Safety"}};
}

std::string normalize_tag(std::string_view tag) {
    std::string out;
    out.reserve(tag.size());
    for (const char ch : tag) {
        if (ch == '_' || ch == '-' || ch == ' ' || ch == '\'' || ch == ',') {
            continue;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    return out;
}

std::string_view to_string(CentralCapability c) {
    return kCapabilityNames.at(static_cast<std::size_t>(c)).first;
}
std::string_view to_string(ValueDimension v) {
    return kValueNames.at(static_cast<std::size_t>(v)).first;
}
std::string_view to_string(Housing h) { return kHousingNames.at(static_cast<std::size_t>(h)).first; }
std::string_view to_string(Registration r) {
    return kRegistrationNames.at(static_cast<std::size_t>(r)).first;
}
std::string_view to_string(Payer p) { return kPayerNames.at(static_cast<std::size_t>(p)).first; }

std::optional<CentralCapability> try_central_capability(std::string_view tag) {
    return lookup(tag, kCapabilityNames);
}

CentralCapability central_capability_of(std::string_view tag) {
    if (auto c = try_central_capability(tag)) {
        return *c;
    }
    throw UnknownCapability(std::string(tag));
}

std::optional<ValueDimension> try_value_dimension(std::string_view tag) {
    return lookup(tag, kValueNames);
}
std::optional<Housing> try_housing(std::string_view tag) { return lookup(tag, kHousingNames); }
std::optional<Registration> try_registration(std::string_view tag) {
    return lookup(tag, kRegistrationNames);
}
std::optional<Payer> try_payer(std::string_view tag) { return lookup(tag, kPayerNames); }

std::vector<std::string> violations(const PersonalState &state) {
    std::vector<std::string> out;
    if (state.health < kMinHealth || state.health > kMaxHealth) {
        out.push_back("health " + std::to_string(state.health) + " outside 0..4");
    }
    if (static_cast<std::size_t>(state.housing) >= kHousingCategories.size()) {
        out.emplace_back("housing outside its category set");
    }
    if (static_cast<std::size_t>(state.registration) >= kRegistrationStates.size()) {
        out.emplace_back("registration outside its category set");
    }
    for (const auto &[name, value] : state.attributes) {
        if (const auto *d = std::get_if<double>(&value); d != nullptr && !std::isfinite(*d)) {
            out.push_back("attribute '" + name + "' is not finite");
        }
    }
    return out;
}

double ChoiceFactors::value_pref(ValueDimension v) const {
    const auto it = value_prefs_.find(v);
    return it == value_prefs_.end() ? 0.0 : it->second;
}

double ChoiceFactors::urgency(const NeedDimension &need) const {
    const auto it = need_urgencies_.find(need);
    return it == need_urgencies_.end() ? 0.0 : it->second;
}

void ChoiceFactors::set_value_pref(ValueDimension v, double weight) {
    check_weight(weight, "value preference");
    value_prefs_[v] = weight;
}

void ChoiceFactors::set_urgency(const NeedDimension &need, double urgency) {
    check_weight(urgency, "need urgency");
    need_urgencies_[need] = urgency;
}

} // namespace capsim
