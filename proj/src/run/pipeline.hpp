#pragma once

#include <iosfwd>

#include "emitter.hpp"
#include "sthm/run/runner.hpp"

namespace sthm::run {

// Runs the command's stages for dimension D, writing outputs through the emitter.
template <int D>
void run_stages(const Invocation& inv, Emitter& out, std::ostream& log);

// Tolerances and design constants recorded in every manifest.
nlohmann::json tolerances(const io::RunConfig& c);

}  // namespace sthm::run
