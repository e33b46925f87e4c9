// depth4.hpp: generated Kokkos C++; do not edit.
#pragma once

#include "lapis_dualview_runtime.hpp"

#include <cstdint>

inline void lapis_initialize() {
  Kokkos::initialize();
}

inline void lapis_finalize() {
  Kokkos::finalize();
}

inline LAPIS::DualView<double****> wave(LAPIS::DualView<double****> v0) {
  v0.syncDevice();
  auto v0_d0 = v0.device_view();
  Kokkos::parallel_for(Kokkos::TeamPolicy<LAPIS::DeviceExec>(2, Kokkos::AUTO, 8), KOKKOS_LAMBDA(const LAPIS::TeamMemberT<LAPIS::DeviceExec>& team) {
    const int64_t i0 = team.league_rank();
    Kokkos::parallel_for(Kokkos::TeamThreadRange(team, 3), [&](const int64_t i1) {
      for (int64_t i2 = 0; i2 < 4; i2 += 1) {
        Kokkos::parallel_for(Kokkos::ThreadVectorRange(team, 8), [&](const int64_t i3) {
          const double v16 = v0_d0(i0, i1, i2, i3);
          const double v17 = v16 * 2.0;
          v0_d0(i0, i1, i2, i3) = v17;
        });
      }
    });
    team.team_barrier();
  });
  v0.modifyDevice();
  return v0;
}

