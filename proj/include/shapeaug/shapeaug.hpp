#pragma once

#include "shapeaug/augment.hpp"
#include "shapeaug/config_io.hpp"
#include "shapeaug/dataset_io.hpp"
#include "shapeaug/errors.hpp"
#include "shapeaug/event_core.hpp"
#include "shapeaug/hash.hpp"
#include "shapeaug/parallel.hpp"
#include "shapeaug/pipeline.hpp"
#include "shapeaug/png.hpp"
#include "shapeaug/rng.hpp"
#include "shapeaug/shape_sim.hpp"
#include "shapeaug/synthetic.hpp"
