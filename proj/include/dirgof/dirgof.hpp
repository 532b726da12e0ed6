#pragma once

#include "dirgof/core.hpp"
#include "dirgof/density.hpp"
#include "dirgof/goftest.hpp"
#include "dirgof/integrate.hpp"
#include "dirgof/kernel.hpp"
#include "dirgof/locreg.hpp"
#include "dirgof/parfit.hpp"
#include "dirgof/simsuite.hpp"
#include "dirgof/special.hpp"
#include "dirgof/sphere.hpp"
#include "dirgof/stats.hpp"
