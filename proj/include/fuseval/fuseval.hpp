#pragma once

#include "fuseval/analysis.hpp"
#include "fuseval/analyzer.hpp"
#include "fuseval/experiment.hpp"
#include "fuseval/fusion.hpp"
#include "fuseval/inverted_index.hpp"
#include "fuseval/io.hpp"
#include "fuseval/leaderboard.hpp"
#include "fuseval/metrics.hpp"
#include "fuseval/parallel.hpp"
#include "fuseval/pipeline.hpp"
#include "fuseval/rerank.hpp"
#include "fuseval/subset_search.hpp"
#include "fuseval/synthetic.hpp"
#include "fuseval/types.hpp"
#include "fuseval/vector_search.hpp"
