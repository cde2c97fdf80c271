#pragma once

namespace mcst {

// Worker-pool size used by the parallel per-patch and per-ray phases.
// Results never depend on this value.
void set_workers(int workers);
int workers();

}  // namespace mcst
