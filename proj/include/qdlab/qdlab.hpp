#pragma once

#include "common.hpp"
#include "parallel.hpp"
#include "disorder.hpp"
#include "fit.hpp"
#include "grid.hpp"
#include "quadrature.hpp"
#include "spectral_measures.hpp"
#include "lattice_operators.hpp"
#include "quantum_dynamics.hpp"
#include "bethe.hpp"
#include "ea_glass.hpp"
#include "emch_radin.hpp"
