#include "mcst/parallel.hpp"

#include <omp.h>

#include <algorithm>

namespace mcst {

void set_workers(int workers) { omp_set_num_threads(std::max(1, workers)); }

int workers() { return omp_get_max_threads(); }

}  // namespace mcst
