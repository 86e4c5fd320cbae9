#pragma once

#include "upsilon/chern.hpp"
#include "upsilon/errors.hpp"
#include "upsilon/filtration.hpp"
#include "upsilon/fixtures.hpp"
#include "upsilon/io.hpp"
#include "upsilon/parallel.hpp"
#include "upsilon/random.hpp"
#include "upsilon/rational.hpp"
#include "upsilon/report.hpp"
#include "upsilon/search.hpp"
#include "upsilon/stability.hpp"
#include "upsilon/subspace.hpp"
#include "upsilon/surface.hpp"
