#pragma once

#include "dexlink/glove/assembly.hpp"
#include "dexlink/glove/calibration.hpp"
#include "dexlink/glove/encoder.hpp"
#include "dexlink/glove/glove_state.hpp"
#include "dexlink/glove/pose_script.hpp"
#include "dexlink/glove/simulated_glove.hpp"
#include "dexlink/glove/wire.hpp"
