#pragma once

namespace soar {

// Worker cap for the OpenMP kernels. SOAR_THREADS=0 or unset means the
// OpenMP default; SOAR_THREADS=1 forces serial execution. Read once per
// process.
int max_threads();

} // namespace soar
