#pragma once

#include <random>

#include "stw/model.hpp"

namespace stw::testsupport {

// Random model satisfying every invariant: points with exactly tip/left/right
// legs, ends with one tip, no self-loops, 3-decimal lengths, one section per
// edge, unique ids. At most 8 nodes.
stw::PlanningModel random_model(std::mt19937_64& rng);

}  // namespace stw::testsupport
