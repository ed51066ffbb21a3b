#pragma once

#include "caphs/approx.hpp"
#include "caphs/colorweights.hpp"
#include "caphs/core.hpp"
#include "caphs/domset.hpp"
#include "caphs/error.hpp"
#include "caphs/exact.hpp"
#include "caphs/feasibility.hpp"
#include "caphs/independence.hpp"
#include "caphs/io.hpp"
#include "caphs/rational.hpp"
#include "caphs/reductions.hpp"
#include "caphs/rng.hpp"
