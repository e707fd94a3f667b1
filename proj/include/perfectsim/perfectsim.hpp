#pragma once

#include "perfectsim/ar.hpp"
#include "perfectsim/cftp.hpp"
#include "perfectsim/checks.hpp"
#include "perfectsim/engine.hpp"
#include "perfectsim/errors.hpp"
#include "perfectsim/factory.hpp"
#include "perfectsim/ising.hpp"
#include "perfectsim/oracles.hpp"
#include "perfectsim/random.hpp"
#include "perfectsim/report.hpp"
#include "perfectsim/suites.hpp"
#include "perfectsim/table.hpp"
