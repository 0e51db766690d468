#pragma once

#include "hypgrass/ambient.hpp"
#include "hypgrass/boundary.hpp"
#include "hypgrass/cat0.hpp"
#include "hypgrass/comparison.hpp"
#include "hypgrass/errors.hpp"
#include "hypgrass/kfields.hpp"
#include "hypgrass/space.hpp"
#include "hypgrass/tolerance.hpp"
