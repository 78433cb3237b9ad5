#pragma once

#include "transop/error.hpp"
#include "transop/rng.hpp"
#include "transop/parallel.hpp"
#include "transop/grid.hpp"
#include "transop/reference.hpp"
#include "transop/quadrature.hpp"
#include "transop/filter.hpp"
#include "transop/transfer.hpp"
#include "transop/invariant.hpp"
#include "transop/systems.hpp"
#include "transop/chain.hpp"
#include "transop/solenoid.hpp"
#include "transop/wavelet.hpp"
#include "transop/schur.hpp"
#include "transop/verify.hpp"
