#pragma once

// Umbrella header for the robustness measurement toolkit.

#include "roma/builtin_models.hpp"
#include "roma/endpoint.hpp"
#include "roma/engine.hpp"
#include "roma/error.hpp"
#include "roma/model.hpp"
#include "roma/report.hpp"
#include "roma/sampler.hpp"
#include "roma/stats.hpp"
#include "roma/wire.hpp"
