#pragma once

#include "cfsdim/core.hpp"
#include "cfsdim/dimension.hpp"
#include "cfsdim/entropy.hpp"
#include "cfsdim/error.hpp"
#include "cfsdim/estimate.hpp"
#include "cfsdim/fourcorner.hpp"
#include "cfsdim/io.hpp"
#include "cfsdim/separation.hpp"
#include "cfsdim/symbolic.hpp"
