#pragma once

#include "sympb/core.hpp"
#include "sympb/roots.hpp"
#include "sympb/boundary.hpp"
#include "sympb/table.hpp"
#include "sympb/map.hpp"
#include "sympb/birkhoff.hpp"
#include "sympb/periodic.hpp"
#include "sympb/spline.hpp"
#include "sympb/parallel.hpp"
#include "sympb/attractor.hpp"
#include "sympb/io.hpp"
#include "sympb/svg.hpp"
