#pragma once

// Everything in one include.

#include "semibound/appendix_recursion.hpp"
#include "semibound/bounds.hpp"
#include "semibound/errors.hpp"
#include "semibound/format.hpp"
#include "semibound/gallery.hpp"
#include "semibound/linalg.hpp"
#include "semibound/matrix_io.hpp"
#include "semibound/orchestrator.hpp"
#include "semibound/plot.hpp"
#include "semibound/resolvent_profile.hpp"
#include "semibound/spectral_split.hpp"
#include "semibound/validation.hpp"
