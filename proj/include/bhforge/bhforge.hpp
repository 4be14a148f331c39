#pragma once

#include "bhforge/bigint.hpp"
#include "bhforge/collisions.hpp"
#include "bhforge/dyadic.hpp"
#include "bhforge/encoding.hpp"
#include "bhforge/errors.hpp"
#include "bhforge/finite.hpp"
#include "bhforge/gaussian.hpp"
#include "bhforge/io.hpp"
#include "bhforge/lattice.hpp"
#include "bhforge/parallel.hpp"
#include "bhforge/rational.hpp"
#include "bhforge/tuple_analysis.hpp"
