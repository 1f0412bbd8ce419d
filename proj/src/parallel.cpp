#include "pshlab/parallel.hpp"

#include <cstdlib>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pshlab {

namespace {

ExecMode initial_mode() {
#ifdef _OPENMP
    const char* env = std::getenv("PSHLAB_SERIAL");
    if (env && env[0] == '1') return ExecMode::serial;
    return ExecMode::parallel;
#else
    return ExecMode::serial;
#endif
}

ExecMode g_mode = initial_mode();

} // namespace

ExecMode default_exec_mode() { return g_mode; }
void set_default_exec_mode(ExecMode mode) { g_mode = mode; }

int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return static_cast<int>(std::thread::hardware_concurrency());
#endif
}

} // namespace pshlab
