#pragma once

#include "lerayflux/besov.hpp"
#include "lerayflux/config.hpp"
#include "lerayflux/energy.hpp"
#include "lerayflux/io.hpp"
#include "lerayflux/simulate.hpp"
