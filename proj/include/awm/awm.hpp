#pragma once

// Umbrella header: agent workflow memory end to end.

#include "awm/action.hpp"
#include "awm/agent.hpp"
#include "awm/config.hpp"
#include "awm/errors.hpp"
#include "awm/evaluation.hpp"
#include "awm/induction.hpp"
#include "awm/judge.hpp"
#include "awm/lm.hpp"
#include "awm/lm_http.hpp"
#include "awm/memory.hpp"
#include "awm/pipeline.hpp"
#include "awm/prompts.hpp"
#include "awm/scripted.hpp"
#include "awm/serialize.hpp"
#include "awm/simenv.hpp"
#include "awm/types.hpp"
