#pragma once

#include "phasespace/config.hpp"
#include "phasespace/diagnostics.hpp"
#include "phasespace/errors.hpp"
#include "phasespace/evolution.hpp"
#include "phasespace/grid.hpp"
#include "phasespace/io.hpp"
#include "phasespace/observables.hpp"
#include "phasespace/phase_ext.hpp"
#include "phasespace/phasespace_version.hpp"
#include "phasespace/runner.hpp"
#include "phasespace/states.hpp"
#include "phasespace/transforms.hpp"
