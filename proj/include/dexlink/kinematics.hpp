#pragma once

#include "dexlink/kinematics/forward_kinematics.hpp"
#include "dexlink/kinematics/hand_layouts.hpp"
#include "dexlink/kinematics/hand_model.hpp"
#include "dexlink/kinematics/model_loader.hpp"
#include "dexlink/kinematics/transform.hpp"
