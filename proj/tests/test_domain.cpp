#include "capsim/domain.h"
#include "capsim/errors.h"

#include "doctest.h"

#include <cmath>
#include <stdexcept>

using namespace capsim;

TEST_CASE("capability tags resolve through normalisation and aliases") {
    CHECK(central_capability_of("bodily_health") == CentralCapability::BodilyHealth);
    CHECK(central_capability_of("life") == CentralCapability::Life);
    CHECK(central_capability_of("Control over one's environment") ==
          CentralCapability::ControlOverEnvironment);
    CHECK(central_capability_of("senses-imagination-thought") ==
          CentralCapability::SensesImaginationThought);
}

TEST_CASE("misspelled capability is rejected with the offending tag") {
    try {
        central_capability_of("bodilly_helth");
        FAIL("expected UnknownCapability");
    } catch (const UnknownCapability &e) {
        CHECK(e.tag() == "bodilly_helth");
    }
    CHECK_FALSE(try_central_capability("").has_value());
}

TEST_CASE("every enum round-trips through its canonical name") {
    for (const auto c : kCentralCapabilities) {
        CHECK(central_capability_of(to_string(c)) == c);
    }
    for (const auto v : kValueDimensions) {
        CHECK(try_value_dimension(to_string(v)) == v);
    }
    for (const auto h : kHousingCategories) {
        CHECK(try_housing(to_string(h)) == h);
    }
    for (const auto r : kRegistrationStates) {
        CHECK(try_registration(to_string(r)) == r);
    }
    for (const auto p : kPayers) {
        CHECK(try_payer(to_string(p)) == p);
    }
}

TEST_CASE("choice factors reject weights outside [0,1]") {
    ChoiceFactors c;
    CHECK_THROWS_AS(c.set_value_pref(ValueDimension::Security, 1.5), std::out_of_range);
    CHECK_THROWS_AS(c.set_value_pref(ValueDimension::Security, -0.01), std::out_of_range);
    CHECK_THROWS_AS(c.set_urgency({"Food"}, std::nan("")), std::out_of_range);
    c.set_value_pref(ValueDimension::Security, 1.0);
    c.set_urgency({"Food"}, 0.0);
    CHECK(c.value_pref(ValueDimension::Security) == 1.0);
    CHECK(c.urgency({"Food"}) == 0.0);
    CHECK(c.urgency({"Shelter"}) == 0.0); // unset reads as 0
}

TEST_CASE("personal state bounds") {
    PersonalState s;
    CHECK(violations(s).empty());
    s.health = 5;
    CHECK(violations(s).size() == 1);
    s.health = -1;
    CHECK(violations(s).size() == 1);
}

TEST_CASE("baseline needs") {
    const auto needs = baseline_needs();
    REQUIRE(needs.size() == 4);
    CHECK(needs[0].name == "Shelter");
    CHECK(needs[2].name == "PainRelief");
}
