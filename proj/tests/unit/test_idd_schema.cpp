#include <doctest.h>

#include <algorithm>
#include <random>

#include "bemflow/idd_schema.hpp"
#include "bemflow/text_util.hpp"
#include "test_helpers.hpp"

using namespace bemflow;

namespace {

const char* kTinyIdd =
    "Widget,\n"
    "      \\memo a test class\n"
    "      \\min-fields 1\n"
    "  A1 , \\field Name\n"
    "       \\required-field\n"
    "       \\type alpha\n"
    "  N1 ; \\field Size\n"
    "       \\type real\n"
    "       \\minimum 0\n"
    "       \\default 2\n";

}  // namespace

TEST_CASE("parse_idd handles a minimal class with a required field") {
    const idd::IddSchema schema = idd::parse_idd(kTinyIdd);
    REQUIRE(schema.defs.size() == 1);
    const idd::ObjectDef& def = idd::object_def(schema, "widget");
    CHECK(def.class_name == "Widget");
    CHECK(def.min_fields == 1);
    REQUIRE(def.fields.size() == 2);
    CHECK(def.fields[0].required);
    CHECK(def.fields[0].kind == idd::FieldKind::Alpha);
    CHECK(def.fields[1].kind == idd::FieldKind::Numeric);
    CHECK(def.fields[1].default_value == "2");
    REQUIRE(def.fields[1].bounds.has_value());
    CHECK(def.fields[1].bounds->min == 0.0);
}

TEST_CASE("parse_idd error cases") {
    CHECK_THROWS_WITH_AS(idd::parse_idd(""), doctest::Contains("empty"), idd::IddError);
    CHECK_THROWS_AS(idd::parse_idd("   \n\n  "), idd::IddError);
    // Directive before any field.
    CHECK_THROWS_AS(idd::parse_idd("Widget,\n  \\default 3\n  A1 ; \\field Name\n"),
                    idd::IddError);
    // Header without a field list.
    CHECK_THROWS_AS(idd::parse_idd("Widget,\n"), idd::IddError);
    // Header missing its terminator.
    CHECK_THROWS_AS(idd::parse_idd("Widget\n  A1 ; \\field Name\n"), idd::IddError);
}

TEST_CASE("parse_idd records duplicate classes with a warning, last wins") {
    const std::string twice = std::string(kTinyIdd) + "\n" +
                              "Widget,\n"
                              "  A1 ; \\field Name\n"
                              "       \\type alpha\n";
    const idd::IddSchema schema = idd::parse_idd(twice);
    CHECK(schema.defs.size() == 1);
    CHECK(schema.warnings.size() == 1);
    CHECK(idd::object_def(schema, "Widget").fields.size() == 1);
}

TEST_CASE("unknown directives are preserved, not rejected") {
    const char* text =
        "Widget,\n"
        "      \\future-object-directive xyz\n"
        "  A1 ; \\field Name\n"
        "       \\shiny new-idea\n";
    const idd::IddSchema schema = idd::parse_idd(text);
    const idd::ObjectDef& def = idd::object_def(schema, "Widget");
    REQUIRE(def.other_directives.size() == 1);
    CHECK(def.other_directives[0].find("future-object-directive") != std::string::npos);
    REQUIRE(def.fields[0].other_directives.size() == 1);
}

TEST_CASE("fixture schema: People matches the documented layout") {
    const idd::IddSchema& schema = testutil::schema();
    CHECK(schema.version == "23.1.0");
    const idd::ObjectDef& people = idd::object_def(schema, "People");
    CHECK(people.min_fields == 10);
    REQUIRE(people.fields.size() == 29);
    CHECK(people.fields[0].name == "Name");
    CHECK(people.fields[0].required);
    CHECK(people.fields[1].name == "Zone or ZoneList or Space or SpaceList Name");
    CHECK(people.fields[27].name == "Cold Stress Temperature Threshold");
    CHECK(people.fields[27].default_value == "15.56");
    const idd::FieldDef* ashrae = people.find_field("Enable ASHRAE 55 Comfort Warnings");
    REQUIRE(ashrae != nullptr);
    CHECK(ashrae->kind == idd::FieldKind::Choice);
    CHECK(ashrae->default_value == "No");
}

TEST_CASE("fixture schema: case-insensitive lookup and suggestions") {
    const idd::IddSchema& schema = testutil::schema();
    CHECK(idd::object_def(schema, "people").class_name == "People");
    CHECK(idd::object_def(schema, "HVACTemplate:Zone:PTAC")
              .find_field("Cooling Coil Gross Rated Cooling COP") != nullptr);
    try {
        idd::object_def(schema, "Peeple");
        FAIL("expected UnknownClassError");
    } catch (const idd::UnknownClassError& e) {
        CHECK(e.suggestion() == "People");
    }
}

TEST_CASE("idd_excerpt starts with the class header and contains min-fields") {
    const idd::IddSchema& schema = testutil::schema();
    const std::string excerpt = idd::idd_excerpt(schema, "People");
    CHECK(excerpt.rfind("People,", 0) == 0);
    CHECK(excerpt.find("\\min-fields 10") != std::string::npos);
}

TEST_CASE("idd_excerpt round-trips every fixture class") {
    const idd::IddSchema& schema = testutil::schema();
    for (const auto& [key, def] : schema.defs) {
        (void)key;
        const std::string excerpt = idd::idd_excerpt(schema, def.class_name);
        const idd::IddSchema reparsed = idd::parse_idd(excerpt);
        const idd::ObjectDef& back = idd::object_def(reparsed, def.class_name);
        CHECK_MESSAGE(back == def, "round-trip mismatch for ", def.class_name);
    }
}

TEST_CASE("fixture schema: Material field order matches the shipped IDD") {
    const idd::IddSchema& schema = testutil::schema();
    const idd::ObjectDef& mat = idd::object_def(schema, "Material");
    const std::vector<std::string> expected = {
        "Name",     "Roughness",          "Thickness",         "Conductivity",      "Density",
        "Specific Heat", "Thermal Absorptance", "Solar Absorptance", "Visible Absorptance"};
    REQUIRE(mat.fields.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(mat.fields[i].name == expected[i]);
}

TEST_CASE("every choice-field default is one of its keys") {
    const idd::IddSchema& schema = testutil::schema();
    for (const auto& [key, def] : schema.defs) {
        (void)key;
        for (const auto& f : def.fields) {
            CHECK((f.kind == idd::FieldKind::Choice) == !f.choices.empty());
            if (f.bounds)
                CHECK((f.kind == idd::FieldKind::Numeric || f.kind == idd::FieldKind::Integer));
            if (f.kind == idd::FieldKind::Choice && f.default_value) {
                bool member = false;
                for (const auto& k : f.choices)
                    if (bemflow::text::iequals(k, *f.default_value)) member = true;
                CHECK_MESSAGE(member, def.class_name, "/", f.name, " default not in keys");
            }
        }
    }
}

TEST_CASE("object-list registry covers referenced lists or records them unresolved") {
    const idd::IddSchema& schema = testutil::schema();
    CHECK(schema.object_lists.count("ScheduleNames") == 1);
    CHECK(schema.object_lists.count("ZoneAndZoneListNames") == 1);
    for (const auto& [key, def] : schema.defs) {
        (void)key;
        for (const auto& f : def.fields) {
            for (const auto& list : f.referenced_lists) {
                const bool declared = schema.object_lists.count(list) == 1;
                const bool unresolved =
                    std::find(schema.unresolved_lists.begin(), schema.unresolved_lists.end(),
                              list) != schema.unresolved_lists.end();
                CHECK_MESSAGE((declared || unresolved), "list ", list, " untracked");
            }
        }
    }
    // The PTAC outdoor-air spec lists have no provider class in the fixture.
    CHECK(std::find(schema.unresolved_lists.begin(), schema.unresolved_lists.end(),
                    "DOASSystemNames") != schema.unresolved_lists.end());
}

TEST_CASE("parse_idd never crashes on arbitrary byte soup") {
    const std::string junk1 = "\x01\x02garbage, more garbage !! \\ odd";
    const std::string junk2 = "People"; // no terminator
    const std::string junk3 = "W,\n \\min-fields not-a-number\n  A1 ; \\field F\n";
    const std::string junk4 = "W,\n  N1 ; \\field F\n   \\minimum banana\n";
    for (const std::string& junk : {junk1, junk2, junk3, junk4}) {
        try {
            (void)idd::parse_idd(junk);
        } catch (const idd::IddError&) {
            // structured error is acceptable; crashing is not
        }
    }

    // Property: random byte strings either parse or raise IddError, nothing
    // else escapes.
    std::mt19937_64 rng(99);
    const std::string alphabet = "Az0 ,;!\\\n\tmin-fields:{}()\"'\x80\x01.";
    for (int iteration = 0; iteration < 300; ++iteration) {
        std::string junk;
        const std::size_t length = rng() % 120;
        for (std::size_t i = 0; i < length; ++i)
            junk.push_back(alphabet[rng() % alphabet.size()]);
        try {
            (void)idd::parse_idd(junk);
        } catch (const idd::IddError&) {
        }
    }
    CHECK(true);
}

TEST_CASE("extensible display names continue the numbering") {
    const idd::IddSchema& schema = testutil::schema();
    const idd::ObjectDef& compact = idd::object_def(schema, "Schedule:Compact");
    REQUIRE(compact.extensible_group == 1);
    CHECK(compact.display_name_at(3) == "Field 1");
    CHECK(compact.display_name_at(4) == "Field 2");
    CHECK(compact.display_name_at(9) == "Field 7");
    const idd::FieldDef* tail = compact.field_at(9);
    REQUIRE(tail != nullptr);
    CHECK(tail->name == "Field 1");
}
