#pragma once

#include "driverid/dataset.hpp"
#include "driverid/error.hpp"
#include "driverid/eval.hpp"
#include "driverid/features.hpp"
#include "driverid/ingest.hpp"
#include "driverid/models.hpp"
#include "driverid/pipeline.hpp"
#include "driverid/preprocess.hpp"
#include "driverid/seed.hpp"
#include "driverid/segment.hpp"
#include "driverid/synth.hpp"
