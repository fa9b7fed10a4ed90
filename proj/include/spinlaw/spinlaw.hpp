#pragma once

#include "spinlaw/couplings.hpp"
#include "spinlaw/csv.hpp"
#include "spinlaw/dynamical_extras.hpp"
#include "spinlaw/entropy_lab.hpp"
#include "spinlaw/error.hpp"
#include "spinlaw/exact_engine.hpp"
#include "spinlaw/gim_dynamics.hpp"
#include "spinlaw/histories.hpp"
#include "spinlaw/linalg.hpp"
#include "spinlaw/locality_bounds.hpp"
#include "spinlaw/parallel.hpp"
#include "spinlaw/pauli_core.hpp"
#include "spinlaw/random.hpp"
