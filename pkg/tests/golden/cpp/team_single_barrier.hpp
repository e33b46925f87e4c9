// team_single_barrier.hpp: generated Kokkos C++; do not edit.
#pragma once

#include "lapis_dualview_runtime.hpp"

#include <cstdint>

inline void lapis_initialize() {
  Kokkos::initialize();
}

inline void lapis_finalize() {
  Kokkos::finalize();
}

inline LAPIS::DualView<double*> teams(LAPIS::DualView<double**> v0, LAPIS::DualView<double**> v1, LAPIS::DualView<double*> v2) {
  v0.syncDevice();
  v1.syncDevice();
  auto v0_d0 = v0.device_view();
  auto v1_d1 = v1.device_view();
  auto v2_d2 = v2.device_view();
  Kokkos::parallel_for(Kokkos::TeamPolicy<LAPIS::DeviceExec>(4, Kokkos::AUTO, 8), KOKKOS_LAMBDA(const LAPIS::TeamMemberT<LAPIS::DeviceExec>& team) {
    const int64_t i0 = team.league_rank();
    Kokkos::parallel_for(Kokkos::TeamThreadRange(team, 8), [&](const int64_t i1) {
      double v12;
      Kokkos::parallel_reduce(Kokkos::ThreadVectorRange(team, 8), [&](const int64_t i2, double& acc2) {
        const double v14 = v0_d0(i0, i2);
        const double v15 = v0_d0(i0, i1);
        const double v16 = v14 * v15;
        acc2 += v16;
      }, v12);
      Kokkos::single(Kokkos::PerThread(team), [&]() {
        v1_d1(i0, i1) = v12;
      });
    });
    team.team_barrier();
    const double v20 = v1_d1(i0, 0);
    Kokkos::single(Kokkos::PerTeam(team), [&]() {
      v2_d2(i0) = v20;
    });
    double v22;
    Kokkos::parallel_reduce(Kokkos::TeamThreadRange(team, 8), [&](const int64_t i1, double& acc1) {
      const double v24 = v1_d1(i0, i1);
      acc1 += v24;
    }, v22);
    Kokkos::single(Kokkos::PerTeam(team), [&]() {
      v2_d2(i0) = v22;
    });
  });
  v1.modifyDevice();
  v2.modifyDevice();
  return v2;
}

