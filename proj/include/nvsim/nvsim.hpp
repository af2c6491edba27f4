// nvsim.hpp — umbrella header.

#pragma once

#include "nvsim/linalg.hpp"
#include "nvsim/system.hpp"
#include "nvsim/hamiltonian.hpp"
#include "nvsim/hyperfine.hpp"
#include "nvsim/eseem.hpp"
#include "nvsim/sensitivity.hpp"
#include "nvsim/noise.hpp"
#include "nvsim/lindblad.hpp"
#include "nvsim/config.hpp"
#include "nvsim/table.hpp"
#include "nvsim/runner.hpp"
#include "nvsim/version.hpp"
