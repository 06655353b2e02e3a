// The distro's libbenchmark_main.a ships LTO bytecode from another GCC
// release and does not link here, so the entry point lives in-tree.
#include <benchmark/benchmark.h>

BENCHMARK_MAIN();
