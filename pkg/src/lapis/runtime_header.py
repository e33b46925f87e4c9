"""The fixed dual-buffer runtime header shipped alongside emitted code."""

RUNTIME_HEADER_NAME = "lapis_dualview_runtime.hpp"

RUNTIME_HEADER = r"""// lapis_dualview_runtime.hpp
//
// Dual host/device buffer wrapper used by generated code. A DualView holds a
// mirrored pair of views plus per-side modified flags: sync copies only when
// the source side actually holds changes, so a clean sync costs one flag
// check. Subviews and casts alias their parent and share its flags, and the
// backing allocation stays alive while any child is alive. On single-memory
// targets both sides are the same buffer and syncs never copy.
#pragma once

#if defined(LAPIS_USE_SERIAL_STUB)
#include "lapis_serial_stub.hpp"
#else
#include <Kokkos_Core.hpp>
#endif

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>

namespace LAPIS {

using DeviceExec = Kokkos::DefaultExecutionSpace;
using HostExec = Kokkos::DefaultHostExecutionSpace;
using DeviceMemory = typename DeviceExec::memory_space;

template <class Exec>
using TeamMemberT = typename Kokkos::TeamPolicy<Exec>::member_type;

template <class DataType>
using HostView = Kokkos::View<DataType, Kokkos::LayoutRight, Kokkos::HostSpace>;
template <class DataType>
using DeviceView = Kokkos::View<DataType, Kokkos::LayoutRight, DeviceMemory>;

#if defined(LAPIS_USE_SERIAL_STUB)
using f16 = float;
#else
using f16 = Kokkos::Experimental::half_t;
#endif

inline constexpr bool kSingleMemorySpace =
    std::is_same<Kokkos::HostSpace, DeviceMemory>::value;

struct TransferStats {
  std::size_t h2d_count = 0;
  std::size_t d2h_count = 0;
  std::size_t h2d_bytes = 0;
  std::size_t d2h_bytes = 0;
};

inline TransferStats& transferStats() {
  static TransferStats stats;
  return stats;
}

inline void resetTransferStats() { transferStats() = TransferStats(); }

// team size left to the runtime; generated team/thread loops guard the tail
inline std::int64_t recommendedTeamSize() {
#if defined(LAPIS_USE_SERIAL_STUB)
  return 4;
#else
  return 32;
#endif
}

template <class T>
inline T ceildivsi(T a, T b) {
  const T q = a / b;
  const T r = a % b;
  return q + ((r != 0 && ((a < 0) == (b < 0))) ? T(1) : T(0));
}

template <class T>
inline T minui(T a, T b) {
  using U = typename std::make_unsigned<T>::type;
  return static_cast<U>(a) < static_cast<U>(b) ? a : b;
}

template <class T>
inline T maxsi(T a, T b) {
  return a > b ? a : b;
}

template <class DataType, class Layout = Kokkos::LayoutRight>
class DualView {
 public:
  using HostMirror = Kokkos::View<DataType, Kokkos::LayoutStride, Kokkos::HostSpace>;
  using DeviceMirror = Kokkos::View<DataType, Kokkos::LayoutStride, DeviceMemory>;
  using value_type = typename HostMirror::value_type;

  DualView() = default;

  template <class... Extents>
  explicit DualView(const std::string& label, Extents... extents)
      : rec_(std::make_shared<Record>()) {
    Kokkos::View<DataType, Layout, Kokkos::HostSpace> h(label,
        static_cast<std::size_t>(extents)...);
    rec_->host = h;
    if constexpr (kSingleMemorySpace) {
      rec_->device = DeviceMirror(rec_->host);
    } else {
      Kokkos::View<DataType, Layout, DeviceMemory> d(label + "_dev",
          static_cast<std::size_t>(extents)...);
      rec_->device = d;
    }
    host_ = rec_->host;
    device_ = rec_->device;
  }

  // adopt an existing host view; the device mirror starts stale
  explicit DualView(const Kokkos::View<DataType, Layout, Kokkos::HostSpace>& h)
      : rec_(std::make_shared<Record>()) {
    rec_->host = h;
    if constexpr (kSingleMemorySpace) {
      rec_->device = DeviceMirror(rec_->host);
    } else {
      rec_->device = makeMirror(h);
    }
    rec_->modified_host = true;
    host_ = rec_->host;
    device_ = rec_->device;
  }

  std::int64_t extent(int r) const {
    return rec_ ? static_cast<std::int64_t>(host_.extent(r)) : 0;
  }
  std::size_t size() const { return rec_ ? host_.size() : 0; }
  std::size_t span_bytes() const { return size() * sizeof(value_type); }
  bool hostModified() const { return rec_ && rec_->modified_host; }
  bool deviceModified() const { return rec_ && rec_->modified_device; }
  long use_count() const { return rec_.use_count(); }

  HostMirror host_view() const { return host_; }
  DeviceMirror device_view() const { return device_; }

  void modifyHost() {
    if (rec_) rec_->modified_host = true;
  }
  void modifyDevice() {
    if (rec_) rec_->modified_device = true;
  }

  void syncDevice() {
    if (!rec_) return;
    if (kSingleMemorySpace) {
      rec_->modified_host = false;
      return;
    }
    if (rec_->modified_host) {
      Kokkos::deep_copy(rec_->device, rec_->host);
      rec_->modified_host = false;
      transferStats().h2d_count += 1;
      transferStats().h2d_bytes += rec_->host.size() * sizeof(value_type);
    }
  }

  void syncHost() {
    if (!rec_) return;
    if (kSingleMemorySpace) {
      rec_->modified_device = false;
      return;
    }
    if (rec_->modified_device) {
      Kokkos::deep_copy(rec_->host, rec_->device);
      rec_->modified_device = false;
      transferStats().d2h_count += 1;
      transferStats().d2h_bytes += rec_->host.size() * sizeof(value_type);
    }
  }

  // unit-stride windows; children alias the parent and share its flags
  DualView subview(std::int64_t o0, std::int64_t l0) const {
    return child(Kokkos::subview(host_, range(o0, l0)),
                 Kokkos::subview(device_, range(o0, l0)));
  }
  DualView subview(std::int64_t o0, std::int64_t l0, std::int64_t o1, std::int64_t l1) const {
    return child(Kokkos::subview(host_, range(o0, l0), range(o1, l1)),
                 Kokkos::subview(device_, range(o0, l0), range(o1, l1)));
  }
  DualView subview(std::int64_t o0, std::int64_t l0, std::int64_t o1, std::int64_t l1,
                   std::int64_t o2, std::int64_t l2) const {
    return child(Kokkos::subview(host_, range(o0, l0), range(o1, l1), range(o2, l2)),
                 Kokkos::subview(device_, range(o0, l0), range(o1, l1), range(o2, l2)));
  }
  DualView subview(std::int64_t o0, std::int64_t l0, std::int64_t o1, std::int64_t l1,
                   std::int64_t o2, std::int64_t l2, std::int64_t o3, std::int64_t l3) const {
    return child(Kokkos::subview(host_, range(o0, l0), range(o1, l1), range(o2, l2), range(o3, l3)),
                 Kokkos::subview(device_, range(o0, l0), range(o1, l1), range(o2, l2), range(o3, l3)));
  }

 private:
  struct Record {
    HostMirror host;
    DeviceMirror device;
    bool modified_host = false;
    bool modified_device = false;
  };

  static Kokkos::pair<std::int64_t, std::int64_t> range(std::int64_t o, std::int64_t l) {
    return Kokkos::make_pair(o, o + l);
  }

  static DeviceMirror makeMirror(const Kokkos::View<DataType, Layout, Kokkos::HostSpace>& h) {
    Kokkos::View<DataType, Layout, DeviceMemory> d(std::string(h.label()) + "_dev",
        allocExtents(h));
    return DeviceMirror(d);
  }

  static Kokkos::LayoutRight allocExtents(
      const Kokkos::View<DataType, Layout, Kokkos::HostSpace>& h) {
    Kokkos::LayoutRight layout{};
    for (std::size_t r = 0; r < HostMirror::rank; ++r) layout.dimension[r] = h.extent(r);
    return layout;
  }

  DualView child(const HostMirror& h, const DeviceMirror& d) const {
    DualView out;
    out.rec_ = rec_;
    out.host_ = h;
    out.device_ = d;
    return out;
  }

  std::shared_ptr<Record> rec_;
  HostMirror host_;
  DeviceMirror device_;
};

namespace detail {
template <class DataType, class Layout>
auto device_of(const DualView<DataType, Layout>& v) {
  return v.device_view();
}
template <class DataType, class Layout, class Space>
auto device_of(const Kokkos::View<DataType, Layout, Space>& v) {
  return v;
}
}  // namespace detail

// kernel-library wrappers: dense C = A*B and y = A*x on the device copies
template <class VA, class VB, class VC>
void gemm(const VA& A, const VB& B, const VC& C) {
  auto a = detail::device_of(A);
  auto b = detail::device_of(B);
  auto c = detail::device_of(C);
  using T = typename decltype(c)::value_type;
  const std::int64_t m = a.extent(0);
  const std::int64_t n = b.extent(1);
  const std::int64_t k = a.extent(1);
  Kokkos::parallel_for(
      Kokkos::MDRangePolicy<DeviceExec, Kokkos::Rank<2>>({0, 0}, {m, n}),
      KOKKOS_LAMBDA(const std::int64_t i, const std::int64_t j) {
        T acc = T(0);
        for (std::int64_t p = 0; p < k; ++p) acc += a(i, p) * b(p, j);
        c(i, j) = acc;
      });
}

template <class VA, class VX, class VY>
void gemv(const VA& A, const VX& X, const VY& Y) {
  auto a = detail::device_of(A);
  auto x = detail::device_of(X);
  auto y = detail::device_of(Y);
  using T = typename decltype(y)::value_type;
  const std::int64_t m = a.extent(0);
  const std::int64_t n = a.extent(1);
  Kokkos::parallel_for(
      Kokkos::RangePolicy<DeviceExec>(0, m), KOKKOS_LAMBDA(const std::int64_t i) {
        T acc = T(0);
        for (std::int64_t j = 0; j < n; ++j) acc += a(i, j) * x(j);
        y(i) = acc;
      });
}

}  // namespace LAPIS
"""


def emit_runtime_header() -> str:
    """The fixed support header; byte-identical across invocations."""
    return RUNTIME_HEADER
