#pragma once

#include "flatpq/heap.hpp"
#include "flatpq/ordered_key_set.hpp"
#include "flatpq/split_map.hpp"
#include "flatpq/step_trace.hpp"
#include "flatpq/bulk_extract.hpp"
#include "flatpq/bulk_insert.hpp"
#include "flatpq/executor.hpp"
#include "flatpq/round.hpp"
#include "flatpq/random.hpp"
#include "flatpq/publication_list.hpp"
#include "flatpq/queues.hpp"
