#pragma once

#include "apgkit/errors.hpp"
#include "apgkit/operators.hpp"
#include "apgkit/affine_subspace.hpp"
#include "apgkit/problem.hpp"
#include "apgkit/schedules.hpp"
#include "apgkit/solvers.hpp"
#include "apgkit/counterexample.hpp"
#include "apgkit/inpaint.hpp"
#include "apgkit/io.hpp"
#include "apgkit/version.hpp"
