#pragma once

#include "leap/adam.hpp"
#include "leap/anchors.hpp"
#include "leap/checkpoint.hpp"
#include "leap/closeness.hpp"
#include "leap/community.hpp"
#include "leap/config.hpp"
#include "leap/dataset.hpp"
#include "leap/evaluate.hpp"
#include "leap/graph.hpp"
#include "leap/labels_cache.hpp"
#include "leap/metrics.hpp"
#include "leap/model.hpp"
#include "leap/pagerank.hpp"
#include "leap/rng.hpp"
#include "leap/split.hpp"
#include "leap/synth.hpp"
#include "leap/tensor.hpp"
#include "leap/training.hpp"
