// Umbrella header.

#pragma once

#include "qsft/bin_detect.hpp"
#include "qsft/coded_offsets.hpp"
#include "qsft/experiment.hpp"
#include "qsft/oracle.hpp"
#include "qsft/peeling.hpp"
#include "qsft/qindex.hpp"
#include "qsft/rng.hpp"
#include "qsft/sampling_plan.hpp"
#include "qsft/spectrum.hpp"
#include "qsft/subprocess_oracle.hpp"
#include "qsft/subsample.hpp"
