#pragma once

// Capability Approach vocabulary shared by every other module.

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace capsim {

/// Nussbaum's ten central capabilities.
enum class CentralCapability : std::uint8_t {
    Life,
    BodilyHealth,
    BodilyIntegrity,
    SensesImaginationThought,
    Emotions,
    PracticalReason,
    Affiliation,
    OtherSpecies,
    Play,
    ControlOverEnvironment,
};

inline constexpr std::array<CentralCapability, 10> kCentralCapabilities{
    CentralCapability::Life,
    CentralCapability::BodilyHealth,
    CentralCapability::BodilyIntegrity,
    CentralCapability::SensesImaginationThought,
    CentralCapability::Emotions,
    CentralCapability::PracticalReason,
    CentralCapability::Affiliation,
    CentralCapability::OtherSpecies,
    CentralCapability::Play,
    CentralCapability::ControlOverEnvironment,
};

/// Schwartz basic values.
enum class ValueDimension : std::uint8_t {
    SelfDirection,
    Stimulation,
    Hedonism,
    Achievement,
    Power,
    Security,
    Conformity,
    Tradition,
    Benevolence,
    Universalism,
};

inline constexpr std::array<ValueDimension, 10> kValueDimensions{
    ValueDimension::SelfDirection, ValueDimension::Stimulation, ValueDimension::Hedonism,
    ValueDimension::Achievement,   ValueDimension::Power,       ValueDimension::Security,
    ValueDimension::Conformity,    ValueDimension::Tradition,   ValueDimension::Benevolence,
    ValueDimension::Universalism,
};

/// Needs are declared per scenario; this is just a named key.
struct NeedDimension {
    std::string name;

    auto operator<=>(const NeedDimension &) const = default;
};

std::vector<NeedDimension> baseline_needs();

/// ETHOS conceptual categories plus Housed.
enum class Housing : std::uint8_t { Roofless, Houseless, Insecure, Inadequate, Housed };

inline constexpr std::array<Housing, 5> kHousingCategories{
    Housing::Roofless, Housing::Houseless, Housing::Insecure, Housing::Inadequate, Housing::Housed};

enum class Registration : std::uint8_t { Registered, InProcess, NonRegistered };

inline constexpr std::array<Registration, 3> kRegistrationStates{
    Registration::Registered, Registration::InProcess, Registration::NonRegistered};

/// Who pays for a consumed resource.
enum class Payer : std::uint8_t { Healthcare, SocialServices };

inline constexpr std::array<Payer, 2> kPayers{Payer::Healthcare, Payer::SocialServices};

inline constexpr int kMinHealth = 0; // critical
inline constexpr int kMaxHealth = 4; // healthy

std::string_view to_string(CentralCapability c);
std::string_view to_string(ValueDimension v);
std::string_view to_string(Housing h);
std::string_view to_string(Registration r);
std::string_view to_string(Payer p);

/// Parses a capability name or alias, ignoring case, spaces, '_' and '-'.
/// Throws UnknownCapability for anything else.
CentralCapability central_capability_of(std::string_view tag);

std::optional<CentralCapability> try_central_capability(std::string_view tag);
std::optional<ValueDimension> try_value_dimension(std::string_view tag);
std::optional<Housing> try_housing(std::string_view tag);
std::optional<Registration> try_registration(std::string_view tag);
std::optional<Payer> try_payer(std::string_view tag);

/// Lowercase with separators stripped; the comparison key for all name lookups.
std::string normalize_tag(std::string_view tag);

using AttributeValue = std::variant<double, std::string>;

struct PersonalState {
    int health = kMinHealth;
    Housing housing = Housing::Roofless;
    Registration registration = Registration::NonRegistered;
    std::map<std::string, AttributeValue> attributes;

    auto operator<=>(const PersonalState &) const = default;
    bool operator==(const PersonalState &) const = default;
};

/// Empty when the state is well-formed.
std::vector<std::string> violations(const PersonalState &state);

/// Need urgencies and value preferences. Every stored weight is in [0,1];
/// setters reject anything else. Missing entries read as 0.
class ChoiceFactors {
  public:
    double value_pref(ValueDimension v) const;
    double urgency(const NeedDimension &need) const;

    /// Throws std::out_of_range for weights outside [0,1] or non-finite.
    void set_value_pref(ValueDimension v, double weight);
    void set_urgency(const NeedDimension &need, double urgency);

    const std::map<ValueDimension, double> &value_prefs() const noexcept { return value_prefs_; }
    const std::map<NeedDimension, double> &need_urgencies() const noexcept {
        return need_urgencies_;
    }

    auto operator<=>(const ChoiceFactors &) const = default;
    bool operator==(const ChoiceFactors &) const = default;

  private:
    std::map<ValueDimension, double> value_prefs_;
    std::map<NeedDimension, double> need_urgencies_;
};

} // namespace capsim
