#pragma once

#include "jetid/config.hpp"
#include "jetid/control.hpp"
#include "jetid/ekf.hpp"
#include "jetid/engine_model.hpp"
#include "jetid/error.hpp"
#include "jetid/excitation.hpp"
#include "jetid/format.hpp"
#include "jetid/grayid.hpp"
#include "jetid/linalg.hpp"
#include "jetid/savgol.hpp"
#include "jetid/simulation.hpp"
#include "jetid/sindy.hpp"
#include "jetid/sizing.hpp"
#include "jetid/timeseries.hpp"
