#pragma once

#include <string>

namespace bemflow::testsupport {

/// Deterministic annual hourly EnergyPlus-style output CSV (8760 rows):
/// six end-use meters plus five site weather variables, with the usual
/// "[unit](Hourly)" header syntax and hour-24 timestamps.
std::string synthetic_annual_csv();

}  // namespace bemflow::testsupport
