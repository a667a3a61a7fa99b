#pragma once

#include "afp/bus_sim.hpp"
#include "afp/detector.hpp"
#include "afp/errors.hpp"
#include "afp/evaluation.hpp"
#include "afp/features.hpp"
#include "afp/fir.hpp"
#include "afp/json_io.hpp"
#include "afp/lof.hpp"
#include "afp/markov.hpp"
#include "afp/rng.hpp"
#include "afp/segmentation.hpp"
#include "afp/trace.hpp"
#include "afp/word_codec.hpp"
