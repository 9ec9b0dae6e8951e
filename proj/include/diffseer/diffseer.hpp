#pragma once

#include "diffseer/aggregate.hpp"
#include "diffseer/error.hpp"
#include "diffseer/ingest.hpp"
#include "diffseer/io.hpp"
#include "diffseer/mask.hpp"
#include "diffseer/matrix.hpp"
#include "diffseer/model.hpp"
#include "diffseer/pipeline.hpp"
#include "diffseer/reorder.hpp"
#include "diffseer/timeline.hpp"
