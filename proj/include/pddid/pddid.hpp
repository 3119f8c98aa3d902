#pragma once

// Umbrella header: difference-in-differences estimation (original and
// detrending), permutational detrending inference, the simulation DGP, the
// experiment harness, and file I/O.

#include "pddid/chart.hpp"
#include "pddid/csv.hpp"
#include "pddid/did.hpp"
#include "pddid/dgp.hpp"
#include "pddid/errors.hpp"
#include "pddid/experiment.hpp"
#include "pddid/glm.hpp"
#include "pddid/panel.hpp"
#include "pddid/permutation.hpp"
#include "pddid/report.hpp"
#include "pddid/rng.hpp"
#include "pddid/tail_prob.hpp"
