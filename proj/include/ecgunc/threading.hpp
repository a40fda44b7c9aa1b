#pragma once

namespace ecgunc {

/// Cap worker threads for the OpenMP kernels. 0 means "all cores".
/// Reads the ECG_UNC_THREADS environment variable when called with 0.
void set_threads(int n);

/// Effective thread count the kernels will use.
int threads();

/// True when the parallel kernel variants should be dispatched.
bool parallel_enabled();

} // namespace ecgunc
