// two_kernel.hpp: generated Kokkos C++; do not edit.
#pragma once

#include "lapis_dualview_runtime.hpp"

#include <cstdint>

inline void lapis_initialize() {
  Kokkos::initialize();
}

inline void lapis_finalize() {
  Kokkos::finalize();
}

inline LAPIS::DualView<double*> two_kernel(LAPIS::DualView<double*> v0) {
  LAPIS::DualView<double*> v7("v7", 64);
  LAPIS::DeviceView<double*> v8("v8", 64);
  LAPIS::DualView<double*> v9("v9", 64);
  for (int64_t i0 = 0; i0 < 64; i0 += 1) {
    const double v11 = v0.host_view()(i0);
    const double v12 = v11 * 2.0;
    v7.host_view()(i0) = v12;
  }
  v7.modifyHost();
  v7.syncDevice();
  auto v7_d0 = v7.device_view();
  Kokkos::parallel_for(Kokkos::RangePolicy<LAPIS::DeviceExec>(0, 64), KOKKOS_LAMBDA(const int64_t i0) {
    const double v14 = v7_d0(i0);
    const double v15 = v14 + 1.0;
    v8(i0) = v15;
  });
  auto v7_d1 = v7.device_view();
  auto v9_d2 = v9.device_view();
  Kokkos::parallel_for(Kokkos::RangePolicy<LAPIS::DeviceExec>(0, 64), KOKKOS_LAMBDA(const int64_t i0) {
    const double v17 = v7_d1(i0);
    const double v18 = v17 * 3.0;
    v9_d2(i0) = v18;
  });
  v9.modifyDevice();
  return v9;
}

