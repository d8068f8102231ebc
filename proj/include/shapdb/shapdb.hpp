#pragma once

#include "shapdb/database.hpp"
#include "shapdb/error.hpp"
#include "shapdb/evaluate.hpp"
#include "shapdb/fd.hpp"
#include "shapdb/graph.hpp"
#include "shapdb/inconsistency.hpp"
#include "shapdb/lineage.hpp"
#include "shapdb/numeric.hpp"
#include "shapdb/parse.hpp"
#include "shapdb/query.hpp"
#include "shapdb/query_attribution.hpp"
#include "shapdb/sampling.hpp"
#include "shapdb/shapley.hpp"
#include "shapdb/tractability.hpp"
