#pragma once

#include "spinwell/analytic.hpp"
#include "spinwell/dynamics.hpp"
#include "spinwell/fock.hpp"
#include "spinwell/model.hpp"
#include "spinwell/observables.hpp"
#include "spinwell/solver.hpp"
#include "spinwell/spectra.hpp"
