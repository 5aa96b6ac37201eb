#pragma once

namespace exitlab::parallel {

/// Name of the environment variable that caps the OpenMP worker count.
inline constexpr const char* kWorkerCapVariable = "EXITLAB_MAX_THREADS";

/// Number of workers a parallel region would use (1 without OpenMP).
int worker_count();

/// Sets the worker count; values < 1 are ignored.
void set_worker_count(int workers);

/// Applies the cap from the environment, if set. Returns the resulting worker count.
int apply_worker_cap_from_env();

}  // namespace exitlab::parallel
