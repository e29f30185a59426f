#pragma once

#include "bitcap/birthday.hpp"
#include "bitcap/calibration.hpp"
#include "bitcap/errors.hpp"
#include "bitcap/noisy_match.hpp"
#include "bitcap/open_world.hpp"
#include "bitcap/parallel.hpp"
#include "bitcap/prob.hpp"
#include "bitcap/simulator.hpp"

namespace bitcap {

inline constexpr const char* kVersion = BITCAP_VERSION;

}  // namespace bitcap
