// Runs the generated SpMV on the 4x4 reference matrix and prints the result
// vector plus the dual-buffer transfer counters, in a line format the
// harness compares against the interpreter's outputs and trace.
#include "spmv.hpp"

#include <cstdint>
#include <cstdio>

int main() {
  lapis_initialize();
  {
    LAPIS::DualView<int64_t*> rowptr("rowptr", 5);
    LAPIS::DualView<int64_t*> colind("colind", 5);
    LAPIS::DualView<double*> values("values", 5);
    LAPIS::DualView<double*> x("x", 4);
    LAPIS::DualView<double*> y("y", 4);

    const int64_t rowptr_data[5] = {0, 2, 3, 3, 5};
    const int64_t colind_data[5] = {0, 1, 2, 0, 3};
    const double values_data[5] = {1.0, 2.0, 3.0, 4.0, 5.0};

    auto h_rowptr = rowptr.host_view();
    auto h_colind = colind.host_view();
    auto h_values = values.host_view();
    for (int64_t i = 0; i < 5; ++i) {
      h_rowptr(i) = rowptr_data[i];
      h_colind(i) = colind_data[i];
      h_values(i) = values_data[i];
    }
    rowptr.modifyHost();
    colind.modifyHost();
    values.modifyHost();

    auto h_x = x.host_view();
    auto h_y = y.host_view();
    for (int64_t i = 0; i < 4; ++i) {
      h_x(i) = 1.0;
      h_y(i) = 0.0;
    }
    x.modifyHost();
    y.modifyHost();

    auto result = spmv(rowptr, colind, values, x, y);
    result.syncHost();
    auto h_result = result.host_view();
    std::printf("y: %g %g %g %g\n", h_result(0), h_result(1), h_result(2), h_result(3));

    const auto& stats = LAPIS::transferStats();
    std::printf("transfers: h2d_count=%zu d2h_count=%zu h2d_bytes=%zu d2h_bytes=%zu\n",
                stats.h2d_count, stats.d2h_count, stats.h2d_bytes, stats.d2h_bytes);
  }
  lapis_finalize();
  return 0;
}
