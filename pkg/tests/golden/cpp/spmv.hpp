// spmv.hpp: generated Kokkos C++; do not edit.
#pragma once

#include "lapis_dualview_runtime.hpp"

#include <cstdint>

inline void lapis_initialize() {
  Kokkos::initialize();
}

inline void lapis_finalize() {
  Kokkos::finalize();
}

inline LAPIS::DualView<double*> spmv(LAPIS::DualView<int64_t*> v0, LAPIS::DualView<int64_t*> v1, LAPIS::DualView<double*> v2, LAPIS::DualView<double*> v3, LAPIS::DualView<double*> v4) {
  const int64_t v7 = static_cast<int64_t>(v0.extent(0));
  const int64_t v8 = v7 - 1;
  const int64_t v10 = static_cast<int64_t>(v0.extent(0));
  const int64_t v11 = v10 - 1;
  const int64_t v12 = v0.host_view()(v11);
  const int64_t v13 = LAPIS::maxsi<int64_t>(v11, 1);
  const int64_t v14 = LAPIS::ceildivsi<int64_t>(v12, v13);
  const bool v17 = v14 <= 16;
  const int64_t v18 = v17 ? 16 : 32;
  const bool v20 = v14 <= 8;
  const int64_t v21 = v20 ? 8 : v18;
  const bool v23 = v14 <= 4;
  const int64_t v24 = v23 ? 4 : v21;
  const bool v26 = v14 <= 2;
  const int64_t v27 = v26 ? 2 : v24;
  const bool v29 = v14 <= 1;
  const int64_t v30 = v29 ? 1 : v27;
  v0.syncDevice();
  v2.syncDevice();
  v1.syncDevice();
  v3.syncDevice();
  auto v0_d0 = v0.device_view();
  auto v2_d1 = v2.device_view();
  auto v1_d2 = v1.device_view();
  auto v3_d3 = v3.device_view();
  auto v4_d4 = v4.device_view();
  const int64_t t5 = LAPIS::recommendedTeamSize();
  const int64_t t6 = (v8 + t5 - 1) / t5;
  Kokkos::parallel_for(Kokkos::TeamPolicy<LAPIS::DeviceExec>(t6, t5, v30), KOKKOS_LAMBDA(const LAPIS::TeamMemberT<LAPIS::DeviceExec>& team) {
    Kokkos::parallel_for(Kokkos::TeamThreadRange(team, t5), [&](const int64_t t7) {
      const int64_t i0 = team.league_rank() * t5 + t7;
      if (i0 < v8) {
        const int64_t v32 = v0_d0(i0);
        const int64_t v33 = i0 + 1;
        const int64_t v34 = v0_d0(v33);
        const int64_t v35 = v34 - v32;
        double v39;
        Kokkos::parallel_reduce(Kokkos::ThreadVectorRange(team, v35), [&](const int64_t i1, double& acc1) {
          const int64_t v41 = v32 + i1;
          const double v42 = v2_d1(v41);
          const int64_t v43 = v1_d2(v41);
          const double v44 = v3_d3(v43);
          const double v45 = v42 * v44;
          acc1 += v45;
        }, v39);
        Kokkos::single(Kokkos::PerThread(team), [&]() {
          v4_d4(i0) = v39;
        });
      }
    });
  });
  v4.modifyDevice();
  return v4;
}

