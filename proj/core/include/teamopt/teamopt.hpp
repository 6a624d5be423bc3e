#pragma once

#include "teamopt/box.hpp"
#include "teamopt/discrete.hpp"
#include "teamopt/errors.hpp"
#include "teamopt/gnf.hpp"
#include "teamopt/grid.hpp"
#include "teamopt/hamiltonian.hpp"
#include "teamopt/infostruct.hpp"
#include "teamopt/integrate.hpp"
#include "teamopt/lq.hpp"
#include "teamopt/model.hpp"
#include "teamopt/profile.hpp"
#include "teamopt/team_solver.hpp"
