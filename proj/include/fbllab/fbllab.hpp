#pragma once

#include "fbllab/error.hpp"
#include "fbllab/seqnorm.hpp"
#include "fbllab/latexpr.hpp"
#include "fbllab/simplex.hpp"
#include "fbllab/search.hpp"
#include "fbllab/space.hpp"
#include "fbllab/fblnorm.hpp"
#include "fbllab/lattice.hpp"
#include "fbllab/embed.hpp"
#include "fbllab/renorm.hpp"
#include "fbllab/project.hpp"

namespace fbllab {
inline constexpr const char* kVersion = "0.1.0";
}
