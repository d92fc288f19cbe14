#pragma once

#include "kploc/annotation.hpp"
#include "kploc/config.hpp"
#include "kploc/consensus.hpp"
#include "kploc/geometry.hpp"
#include "kploc/io.hpp"
#include "kploc/keypoints.hpp"
#include "kploc/metrics.hpp"
#include "kploc/parallel.hpp"
#include "kploc/partbox.hpp"
#include "kploc/rng.hpp"
#include "kploc/simulator.hpp"
#include "kploc/training.hpp"
