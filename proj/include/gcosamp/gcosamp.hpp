#pragma once

#include "gcosamp/common.hpp"
#include "gcosamp/config.hpp"
#include "gcosamp/engine.hpp"
#include "gcosamp/harness.hpp"
#include "gcosamp/io.hpp"
#include "gcosamp/least_squares.hpp"
#include "gcosamp/models.hpp"
#include "gcosamp/operators.hpp"
#include "gcosamp/sacosamp.hpp"
#include "gcosamp/theory.hpp"
