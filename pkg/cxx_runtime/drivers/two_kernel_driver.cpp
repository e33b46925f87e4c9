// Parity check for the lazy-transfer fixture: a host loop feeds two device
// kernels, so exactly one H2D (the staging buffer) and one D2H (the returned
// result) must happen.
#include "two_kernel.hpp"

#include <cstdint>
#include <cstdio>

int main() {
  lapis_initialize();
  {
    LAPIS::DualView<double*> x("x", 64);
    auto h_x = x.host_view();
    for (int64_t i = 0; i < 64; ++i) h_x(i) = 0.5 * double(i);
    x.modifyHost();

    auto result = two_kernel(x);
    result.syncHost();
    auto h = result.host_view();
    std::printf("y: %g %g %g %g\n", h(0), h(1), h(2), h(3));

    const auto& stats = LAPIS::transferStats();
    std::printf("transfers: h2d_count=%zu d2h_count=%zu h2d_bytes=%zu d2h_bytes=%zu\n",
                stats.h2d_count, stats.d2h_count, stats.h2d_bytes, stats.d2h_bytes);
  }
  lapis_finalize();
  return 0;
}
