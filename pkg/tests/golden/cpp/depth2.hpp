// depth2.hpp: generated Kokkos C++; do not edit.
#pragma once

#include "lapis_dualview_runtime.hpp"

#include <cstdint>

inline void lapis_initialize() {
  Kokkos::initialize();
}

inline void lapis_finalize() {
  Kokkos::finalize();
}

inline LAPIS::DualView<double*> rowsums(LAPIS::DualView<double**> v0, LAPIS::DualView<double*> v1) {
  v0.syncDevice();
  auto v0_d0 = v0.device_view();
  auto v1_d1 = v1.device_view();
  const int64_t t2 = LAPIS::recommendedTeamSize();
  const int64_t t3 = (16 + t2 - 1) / t2;
  Kokkos::parallel_for(Kokkos::TeamPolicy<LAPIS::DeviceExec>(t3, t2, 8), KOKKOS_LAMBDA(const LAPIS::TeamMemberT<LAPIS::DeviceExec>& team) {
    Kokkos::parallel_for(Kokkos::TeamThreadRange(team, t2), [&](const int64_t t4) {
      const int64_t i0 = team.league_rank() * t2 + t4;
      if (i0 < 16) {
        double v9;
        Kokkos::parallel_reduce(Kokkos::ThreadVectorRange(team, 8), [&](const int64_t i1, double& acc1) {
          const double v11 = v0_d0(i0, i1);
          acc1 += v11;
        }, v9);
        Kokkos::single(Kokkos::PerThread(team), [&]() {
          v1_d1(i0) = v9;
        });
      }
    });
  });
  v1.modifyDevice();
  return v1;
}

