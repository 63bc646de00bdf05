#pragma once

#include "ftc/agent.hpp"
#include "ftc/env.hpp"
#include "ftc/errors.hpp"
#include "ftc/harness.hpp"
#include "ftc/nn.hpp"
#include "ftc/random.hpp"
#include "ftc/report.hpp"
#include "ftc/sim.hpp"
#include "ftc/surrogate.hpp"
