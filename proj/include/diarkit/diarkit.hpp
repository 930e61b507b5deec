#pragma once

#include "diarkit/cluster.hpp"
#include "diarkit/core.hpp"
#include "diarkit/error.hpp"
#include "diarkit/fusion.hpp"
#include "diarkit/hungarian.hpp"
#include "diarkit/io.hpp"
#include "diarkit/metrics.hpp"
#include "diarkit/overlap.hpp"
#include "diarkit/simulate.hpp"
#include "diarkit/vad.hpp"
