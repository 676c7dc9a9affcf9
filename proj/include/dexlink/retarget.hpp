#pragma once

#include "dexlink/retarget/config.hpp"
#include "dexlink/retarget/ik.hpp"
#include "dexlink/retarget/retarget.hpp"
