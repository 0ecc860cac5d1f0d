#pragma once

#include "rangeland/rng.hpp"
#include "rangeland/params.hpp"
#include "rangeland/param_io.hpp"
#include "rangeland/drivers.hpp"
#include "rangeland/env.hpp"
#include "rangeland/socio.hpp"
#include "rangeland/engine.hpp"
#include "rangeland/sa.hpp"
#include "rangeland/campaign.hpp"
