#pragma once

#include "occr/aggregate.hpp"
#include "occr/config.hpp"
#include "occr/domain.hpp"
#include "occr/error.hpp"
#include "occr/harness.hpp"
#include "occr/ingest.hpp"
#include "occr/lar_sim.hpp"
#include "occr/oracle.hpp"
#include "occr/parallel.hpp"
#include "occr/rng.hpp"
#include "occr/subscores.hpp"
#include "occr/synth.hpp"
