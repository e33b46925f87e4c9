// Exercises the dual-buffer flag algebra directly: repeated syncs on a clean
// wrapper must not copy, children must share flags with their parent, and a
// modify-then-sync pair must copy exactly once.
#include "lapis_dualview_runtime.hpp"

#include <cstdint>
#include <cstdio>

int main() {
  Kokkos::initialize();
  int failures = 0;
  {
    auto& stats = LAPIS::transferStats();

    LAPIS::DualView<double*> clean("clean", 8);
    clean.syncDevice();
    clean.syncDevice();
    clean.syncHost();
    if (stats.h2d_count != 0 || stats.d2h_count != 0) {
      std::printf("FAIL: clean syncs copied (h2d=%zu d2h=%zu)\n",
                  stats.h2d_count, stats.d2h_count);
      ++failures;
    }

    LAPIS::DualView<double*> parent("parent", 8);
    auto child = parent.subview(2, 4);
    auto h = parent.host_view();
    for (int64_t i = 0; i < 8; ++i) h(i) = double(i);
    child.modifyHost();  // children share modified flags with the parent
    if (!parent.hostModified()) {
      std::printf("FAIL: child modify did not reach the parent flag\n");
      ++failures;
    }
    child.syncDevice();  // syncing the child syncs the whole parent buffer
    if (stats.h2d_count != 1 || stats.h2d_bytes != 8 * sizeof(double)) {
      std::printf("FAIL: child sync (h2d=%zu bytes=%zu)\n", stats.h2d_count, stats.h2d_bytes);
      ++failures;
    }
    if (parent.hostModified()) {
      std::printf("FAIL: parent flag still set after child sync\n");
      ++failures;
    }
    auto d = parent.device_view();
    if (d(3) != 3.0) {
      std::printf("FAIL: device copy wrong after sync (%g)\n", d(3));
      ++failures;
    }
    parent.syncDevice();  // idempotent
    if (stats.h2d_count != 1) {
      std::printf("FAIL: second sync copied again\n");
      ++failures;
    }

    // reference counting: the allocation outlives the parent handle while a
    // child is alive
    auto survivor = parent.subview(0, 8);
    parent = LAPIS::DualView<double*>();
    auto hs = survivor.host_view();
    if (hs(5) != 5.0) {
      std::printf("FAIL: storage dropped while a child was alive\n");
      ++failures;
    }
  }
  std::printf(failures ? "sync_probe: FAIL\n" : "sync_probe: OK\n");
  Kokkos::finalize();
  return failures ? 1 : 0;
}
