#pragma once

#include "kpzlab/version.hpp"
#include "kpzlab/random.hpp"
#include "kpzlab/lattice.hpp"
#include "kpzlab/clock.hpp"
#include "kpzlab/exclusion.hpp"
#include "kpzlab/multitype.hpp"
#include "kpzlab/metric.hpp"
#include "kpzlab/web.hpp"
#include "kpzlab/horizon.hpp"
#include "kpzlab/stats.hpp"
#include "kpzlab/config.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/audit.hpp"
