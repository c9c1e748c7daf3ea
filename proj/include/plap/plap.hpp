#pragma once

#include "plap/asymptotics.hpp"
#include "plap/domain.hpp"
#include "plap/errors.hpp"
#include "plap/field.hpp"
#include "plap/fixed_point.hpp"
#include "plap/io.hpp"
#include "plap/p_poisson.hpp"
#include "plap/solver_config.hpp"
#include "plap/spectral.hpp"
#include "plap/thresholds.hpp"
#include "plap/version.hpp"
