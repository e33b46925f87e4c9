// Parity check for global constant data: lapis_initialize() populates the
// weights on the host, the kernel pulls them to the device lazily.
#include "globals.hpp"

#include <cstdint>
#include <cstdio>

int main() {
  lapis_initialize();
  {
    LAPIS::DualView<double*> x("x", 4);
    auto h_x = x.host_view();
    for (int64_t i = 0; i < 4; ++i) h_x(i) = double(i + 1);
    x.modifyHost();

    auto result = apply_weights(x);
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
