#pragma once

#include "coxgibbs/calibration.hpp"
#include "coxgibbs/composite_likelihood.hpp"
#include "coxgibbs/dataset.hpp"
#include "coxgibbs/diagnostics.hpp"
#include "coxgibbs/errors.hpp"
#include "coxgibbs/gibbs.hpp"
#include "coxgibbs/metropolis.hpp"
#include "coxgibbs/partial_likelihood.hpp"
#include "coxgibbs/polya_gamma.hpp"
#include "coxgibbs/random.hpp"
#include "coxgibbs/synth.hpp"
