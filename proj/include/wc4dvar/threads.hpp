#pragma once

#include <functional>

#include <Eigen/Core>

namespace wc4dvar {

// Worker count for column fan-out and sweep jobs. WC4DVAR_THREADS caps it;
// defaults to the hardware concurrency, never less than 1.
int worker_count();

// Runs fn(i) for i in [0, count) across workers. Each index is processed by
// exactly one worker; results must be written to disjoint slots so the
// output is identical for any worker count.
void parallel_for(Eigen::Index count, const std::function<void(Eigen::Index)>& fn);

}  // namespace wc4dvar
