#pragma once

#include "coupled/chebyshev.hpp"
#include "coupled/errors.hpp"
#include "coupled/graph.hpp"
#include "coupled/instance_io.hpp"
#include "coupled/libsvm.hpp"
#include "coupled/linalg.hpp"
#include "coupled/lower_bound.hpp"
#include "coupled/oracle.hpp"
#include "coupled/problem.hpp"
#include "coupled/simnet.hpp"
#include "coupled/solver.hpp"
#include "coupled/spectral.hpp"
