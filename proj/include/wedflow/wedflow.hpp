#pragma once

#include <wedflow/errors.hpp>
#include <wedflow/spaces.hpp>
#include <wedflow/potentials.hpp>
#include <wedflow/moreau_yosida.hpp>
#include <wedflow/block_tridiagonal.hpp>
#include <wedflow/wed.hpp>
#include <wedflow/fixed_point.hpp>
#include <wedflow/oracle.hpp>
#include <wedflow/sweeps.hpp>
#include <wedflow/pde.hpp>
