#pragma once

#include "config.hpp"
#include "csv.hpp"
#include "cumulant.hpp"
#include "energy_trace.hpp"
#include "error.hpp"
#include "fit.hpp"
#include "lindblad.hpp"
#include "log.hpp"
#include "model.hpp"
#include "observables.hpp"
#include "ode.hpp"
#include "parallel.hpp"
#include "spectrum.hpp"
#include "units.hpp"
