// matmul_f64.hpp: generated Kokkos C++; do not edit.
#pragma once

#include "lapis_dualview_runtime.hpp"

#include <cstdint>

inline void lapis_initialize() {
  Kokkos::initialize();
}

inline void lapis_finalize() {
  Kokkos::finalize();
}

inline LAPIS::DualView<double**> matmul(LAPIS::DualView<double**> v0, LAPIS::DualView<double**> v1) {
  LAPIS::DualView<double**> v2("v2", 32, 32);
  v0.syncDevice();
  v1.syncDevice();
  auto v0_d0 = v0.device_view();
  auto v1_d1 = v1.device_view();
  auto v2_d2 = v2.device_view();
  Kokkos::parallel_for(Kokkos::TeamPolicy<LAPIS::DeviceExec>(32, Kokkos::AUTO, 32), KOKKOS_LAMBDA(const LAPIS::TeamMemberT<LAPIS::DeviceExec>& team) {
    const int64_t i0 = team.league_rank();
    Kokkos::parallel_for(Kokkos::TeamThreadRange(team, 32), [&](const int64_t i1) {
      double v17;
      Kokkos::parallel_reduce(Kokkos::ThreadVectorRange(team, 32), [&](const int64_t i2, double& acc2) {
        const double v19 = v0_d0(i0, i2);
        const double v20 = v1_d1(i2, i1);
        const double v21 = v19 * v20;
        acc2 += v21;
      }, v17);
      Kokkos::single(Kokkos::PerThread(team), [&]() {
        v2_d2(i0, i1) = v17;
      });
    });
    team.team_barrier();
  });
  v2.modifyDevice();
  return v2;
}

