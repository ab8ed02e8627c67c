// ttedopa.hpp: Umbrella header

#pragma once

#include "ttedopa/errors.hpp"
#include "ttedopa/quadrature.hpp"
#include "ttedopa/spectral.hpp"
#include "ttedopa/chainmap.hpp"
#include "ttedopa/chain_cache.hpp"
#include "ttedopa/models.hpp"
#include "ttedopa/tensor/site_tensor.hpp"
#include "ttedopa/tensor/mps.hpp"
#include "ttedopa/tensor/mpo.hpp"
#include "ttedopa/tensor/krylov.hpp"
#include "ttedopa/tensor/effective.hpp"
#include "ttedopa/tensor/checkpoint.hpp"
#include "ttedopa/observables.hpp"
#include "ttedopa/tdvp.hpp"
#include "ttedopa/oracles.hpp"
#include "ttedopa/ratefit.hpp"
