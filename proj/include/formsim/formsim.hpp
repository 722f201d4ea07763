#pragma once

#include "formsim/geometry.hpp"
#include "formsim/rng.hpp"
#include "formsim/kinematics.hpp"
#include "formsim/formation.hpp"
#include "formsim/netproto.hpp"
#include "formsim/control.hpp"
#include "formsim/scenario.hpp"
#include "formsim/metrics.hpp"
#include "formsim/experiment.hpp"
#include "formsim/batch.hpp"
