#pragma once

// Canned scenarios for the scripted backend: the iUnit generation case,
// the simple-file modification case, and small fault-injection cases used
// by the repair-loop tests.

#include <cstdint>
#include <string>
#include <vector>

#include "scripted_llm.hpp"

namespace bemflow::testsupport {

/// The 29 (type, name) pairs of the iUnit extraction table, in order.
const std::vector<std::pair<std::string, std::string>>& iunit_expected_items();

/// The natural-language building description fed to the planning workflow.
std::string iunit_description();

/// Common internal-load object list used by the extraction prompt.
std::vector<std::string> iunit_common_object_list();

/// Scenario for one iUnit trial. Trials differ in their salt, their
/// placeholder tokens, and (odd trials) an extra dangling schedule typo.
ScriptedScenario iunit_scenario(int trial);

/// Scenario for the three-part modification of the simple file.
ScriptedScenario modify_simple_scenario();
std::string modify_simple_request();

/// Repair corrections for the seeded-fault document (one dangling schedule
/// reference on the exterior lights, one People schedule placeholder).
ScriptedScenario seeded_fault_scenario();

/// iUnit scenario where one material generation violates the rules once and
/// succeeds on the retry prompt.
ScriptedScenario flaky_generation_scenario(int trial);

/// iUnit scenario whose first repair response lists 11 tuples.
ScriptedScenario oversized_repair_scenario(int trial);

}  // namespace bemflow::testsupport
