// lapis_serial_stub.hpp
//
// Serial, header-only stand-in for the parallel programming model used by
// generated code, selected with -DLAPIS_USE_SERIAL_STUB. Every parallel
// construct executes sequentially in ascending index order, matching the
// reference interpreter, and host/device are modeled as two distinct memory
// spaces so dual-buffer transfers really copy (and can be counted).
#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#define KOKKOS_LAMBDA [=]

namespace Kokkos {

inline void initialize() {}
inline void finalize() {}
inline void fence() {}

[[noreturn]] inline void abort(const char* message) {
  std::fprintf(stderr, "abort: %s\n", message);
  std::exit(1);
}

struct HostSpace {};
struct StubDeviceSpace {};

struct DefaultExecutionSpace {
  using memory_space = StubDeviceSpace;
};
struct DefaultHostExecutionSpace {
  using memory_space = HostSpace;
};

inline constexpr std::size_t ARRAY_LAYOUT_MAX_RANK = 8;

struct LayoutRight {
  std::size_t dimension[ARRAY_LAYOUT_MAX_RANK] = {0, 0, 0, 0, 0, 0, 0, 0};
};
struct LayoutStride {
  std::size_t dimension[ARRAY_LAYOUT_MAX_RANK] = {0, 0, 0, 0, 0, 0, 0, 0};
};

template <class A, class B>
using pair = std::pair<A, B>;

template <class A, class B>
inline std::pair<A, B> make_pair(A a, B b) {
  return std::pair<A, B>(a, b);
}

namespace stub_detail {

template <class T>
struct DataTypeTraits {
  using value_type = T;
  static constexpr std::size_t rank = 0;
};
template <class T>
struct DataTypeTraits<T*> {
  using value_type = typename DataTypeTraits<T>::value_type;
  static constexpr std::size_t rank = DataTypeTraits<T>::rank + 1;
};

}  // namespace stub_detail

// Strided window onto a shared flat allocation. The Layout parameter only
// tags the declared layout; strides are always carried explicitly, so
// LayoutRight and LayoutStride views interconvert freely.
template <class DataType, class Layout = LayoutRight, class Space = HostSpace>
class View {
 public:
  using value_type = typename stub_detail::DataTypeTraits<DataType>::value_type;
  using memory_space = Space;
  static constexpr std::size_t rank = stub_detail::DataTypeTraits<DataType>::rank;

  View() = default;

  template <class... Extents,
            std::enable_if_t<sizeof...(Extents) == rank &&
                             (std::is_integral_v<Extents> && ...), int> = 0>
  explicit View(const std::string& label, Extents... extents) : label_(label) {
    const std::size_t dims[] = {static_cast<std::size_t>(extents)..., 0};
    allocate(dims);
  }

  explicit View(const std::string& label, const LayoutRight& layout) : label_(label) {
    allocate(layout.dimension);
  }

  template <class OtherLayout>
  View(const View<DataType, OtherLayout, Space>& other)
      : data_(other.data_), offset_(other.offset_), label_(other.label_) {
    for (std::size_t r = 0; r < rank; ++r) {
      dims_[r] = other.dims_[r];
      strides_[r] = other.strides_[r];
    }
  }

  std::size_t extent(std::size_t r) const { return r < rank ? dims_[r] : 1; }

  std::size_t size() const {
    std::size_t n = 1;
    for (std::size_t r = 0; r < rank; ++r) n *= dims_[r];
    return n;
  }

  const std::string& label() const { return label_; }
  long use_count() const { return data_.use_count(); }

  template <class... Is>
  value_type& operator()(Is... indices) const {
    static_assert(sizeof...(Is) == rank, "subscript count must match rank");
    const std::size_t idx[] = {static_cast<std::size_t>(indices)..., 0};
    std::size_t flat = offset_;
    for (std::size_t r = 0; r < rank; ++r) flat += idx[r] * strides_[r];
    return (*data_)[flat];
  }

 private:
  template <class, class, class>
  friend class View;
  template <class DT, class L, class S, class... Pairs>
  friend View<DT, LayoutStride, S> subview(const View<DT, L, S>&, Pairs...);

  void allocate(const std::size_t* dims) {
    std::size_t n = 1;
    for (std::size_t r = 0; r < rank; ++r) {
      dims_[r] = dims[r];
      n *= dims[r];
    }
    std::size_t stride = 1;
    for (std::size_t r = rank; r-- > 0;) {
      strides_[r] = stride;
      stride *= dims_[r];
    }
    data_ = std::make_shared<std::vector<value_type>>(n, value_type());
  }

  std::shared_ptr<std::vector<value_type>> data_;
  std::size_t offset_ = 0;
  std::size_t dims_[rank ? rank : 1] = {};
  std::size_t strides_[rank ? rank : 1] = {};
  std::string label_;
};

template <class DT, class L, class S, class... Pairs>
View<DT, LayoutStride, S> subview(const View<DT, L, S>& v, Pairs... ranges) {
  static_assert(sizeof...(Pairs) == View<DT, L, S>::rank,
                "subview takes one (begin, end) pair per dimension");
  View<DT, LayoutStride, S> out;
  out.data_ = v.data_;
  out.label_ = v.label_;
  out.offset_ = v.offset_;
  const std::pair<std::int64_t, std::int64_t> bounds[] = {
      std::pair<std::int64_t, std::int64_t>(ranges.first, ranges.second)...};
  for (std::size_t r = 0; r < View<DT, L, S>::rank; ++r) {
    out.offset_ += static_cast<std::size_t>(bounds[r].first) * v.strides_[r];
    out.dims_[r] = static_cast<std::size_t>(bounds[r].second - bounds[r].first);
    out.strides_[r] = v.strides_[r];
  }
  return out;
}

template <class DT, class LD, class LS, class SD, class SS>
void deep_copy(const View<DT, LD, SD>& dst, const View<DT, LS, SS>& src) {
  constexpr std::size_t rank = View<DT, LD, SD>::rank;
  if constexpr (rank == 0) {
    dst() = src();
    return;
  } else {
    std::size_t idx[rank] = {};
    const std::size_t total = dst.size();
    for (std::size_t n = 0; n < total; ++n) {
      if constexpr (rank == 1) dst(idx[0]) = src(idx[0]);
      if constexpr (rank == 2) dst(idx[0], idx[1]) = src(idx[0], idx[1]);
      if constexpr (rank == 3) dst(idx[0], idx[1], idx[2]) = src(idx[0], idx[1], idx[2]);
      if constexpr (rank == 4)
        dst(idx[0], idx[1], idx[2], idx[3]) = src(idx[0], idx[1], idx[2], idx[3]);
      static_assert(rank <= 4, "stub deep_copy supports rank <= 4");
      for (std::size_t r = rank; r-- > 0;) {
        if (++idx[r] < dst.extent(r)) break;
        idx[r] = 0;
      }
    }
  }
}

// --- policies ------------------------------------------------------------------

struct AUTO_t {};
inline constexpr AUTO_t AUTO{};

template <class Exec = DefaultExecutionSpace>
struct RangePolicy {
  std::int64_t begin;
  std::int64_t end;
  RangePolicy(std::int64_t b, std::int64_t e) : begin(b), end(e) {}
};

template <unsigned N>
struct Rank {
  static constexpr unsigned rank = N;
};

template <class Exec, class RankT>
struct MDRangePolicy {
  std::int64_t lower[RankT::rank];
  std::int64_t upper[RankT::rank];
  MDRangePolicy(std::initializer_list<std::int64_t> lo, std::initializer_list<std::int64_t> hi) {
    std::size_t r = 0;
    for (auto v : lo) lower[r++] = v;
    r = 0;
    for (auto v : hi) upper[r++] = v;
  }
};

class StubTeamMember {
 public:
  StubTeamMember(std::int64_t rank, std::int64_t size, std::int64_t team)
      : league_rank_(rank), league_size_(size), team_size_(team) {}
  std::int64_t league_rank() const { return league_rank_; }
  std::int64_t league_size() const { return league_size_; }
  std::int64_t team_size() const { return team_size_; }
  std::int64_t team_rank() const { return 0; }
  void team_barrier() const {}

 private:
  std::int64_t league_rank_;
  std::int64_t league_size_;
  std::int64_t team_size_;
};

template <class Exec = DefaultExecutionSpace>
struct TeamPolicy {
  using member_type = StubTeamMember;
  std::int64_t league;
  std::int64_t team;
  std::int64_t vector_length;
  TeamPolicy(std::int64_t l, std::int64_t t, std::int64_t v = 1)
      : league(l), team(t), vector_length(v) {}
  TeamPolicy(std::int64_t l, AUTO_t, std::int64_t v = 1)
      : league(l), team(1), vector_length(v) {}
};

struct TeamThreadRangeBoundaries {
  const StubTeamMember& member;
  std::int64_t count;
};
struct ThreadVectorRangeBoundaries {
  const StubTeamMember& member;
  std::int64_t count;
};

inline TeamThreadRangeBoundaries TeamThreadRange(const StubTeamMember& m, std::int64_t n) {
  return {m, n};
}
inline ThreadVectorRangeBoundaries ThreadVectorRange(const StubTeamMember& m, std::int64_t n) {
  return {m, n};
}

struct PerTeam {
  explicit PerTeam(const StubTeamMember&) {}
};
struct PerThread {
  explicit PerThread(const StubTeamMember&) {}
};

// --- reducers --------------------------------------------------------------------

template <class T>
struct Sum {
  T& value;
  explicit Sum(T& v) : value(v) {}
  static T identity() { return T(); }
};
template <class T>
struct Prod {
  T& value;
  explicit Prod(T& v) : value(v) {}
  static T identity() { return T(1); }
};
template <class T>
struct Min {
  T& value;
  explicit Min(T& v) : value(v) {}
  static T identity() {
    return std::numeric_limits<T>::has_infinity ? std::numeric_limits<T>::infinity()
                                                : std::numeric_limits<T>::max();
  }
};
template <class T>
struct Max {
  T& value;
  explicit Max(T& v) : value(v) {}
  static T identity() {
    return std::numeric_limits<T>::has_infinity ? -std::numeric_limits<T>::infinity()
                                                : std::numeric_limits<T>::lowest();
  }
};

// --- parallel dispatch: everything runs serially, ascending ------------------------

template <class Exec, class F>
void parallel_for(const RangePolicy<Exec>& p, F f) {
  for (std::int64_t i = p.begin; i < p.end; ++i) f(i);
}

template <class Exec, unsigned N, class F>
void parallel_for(const MDRangePolicy<Exec, Rank<N>>& p, F f) {
  static_assert(N >= 2 && N <= 4, "stub MDRange supports rank 2..4");
  if constexpr (N == 2) {
    for (std::int64_t i = p.lower[0]; i < p.upper[0]; ++i)
      for (std::int64_t j = p.lower[1]; j < p.upper[1]; ++j) f(i, j);
  } else if constexpr (N == 3) {
    for (std::int64_t i = p.lower[0]; i < p.upper[0]; ++i)
      for (std::int64_t j = p.lower[1]; j < p.upper[1]; ++j)
        for (std::int64_t k = p.lower[2]; k < p.upper[2]; ++k) f(i, j, k);
  } else {
    for (std::int64_t i = p.lower[0]; i < p.upper[0]; ++i)
      for (std::int64_t j = p.lower[1]; j < p.upper[1]; ++j)
        for (std::int64_t k = p.lower[2]; k < p.upper[2]; ++k)
          for (std::int64_t l = p.lower[3]; l < p.upper[3]; ++l) f(i, j, k, l);
  }
}

template <class Exec, class F>
void parallel_for(const TeamPolicy<Exec>& p, F f) {
  for (std::int64_t rank = 0; rank < p.league; ++rank) {
    f(StubTeamMember(rank, p.league, p.team));
  }
}

template <class F>
void parallel_for(const TeamThreadRangeBoundaries& p, F f) {
  for (std::int64_t i = 0; i < p.count; ++i) f(i);
}

template <class F>
void parallel_for(const ThreadVectorRangeBoundaries& p, F f) {
  for (std::int64_t i = 0; i < p.count; ++i) f(i);
}

namespace stub_detail {

template <class Policy, class F, class T>
void reduce_loop_1d(std::int64_t begin, std::int64_t end, F& f, T& acc) {
  for (std::int64_t i = begin; i < end; ++i) f(i, acc);
}

}  // namespace stub_detail

template <class Exec, class F, class T>
void parallel_reduce(const RangePolicy<Exec>& p, F f, T& result) {
  T acc = T();
  for (std::int64_t i = p.begin; i < p.end; ++i) f(i, acc);
  result = acc;
}

template <class Exec, class F, class Reducer>
auto parallel_reduce(const RangePolicy<Exec>& p, F f, Reducer r)
    -> decltype(void(Reducer::identity())) {
  auto acc = Reducer::identity();
  for (std::int64_t i = p.begin; i < p.end; ++i) f(i, acc);
  r.value = acc;
}

template <class Exec, unsigned N, class F, class T>
void parallel_reduce(const MDRangePolicy<Exec, Rank<N>>& p, F f, T& result) {
  static_assert(N == 2, "stub MDRange reduce supports rank 2");
  T acc = T();
  for (std::int64_t i = p.lower[0]; i < p.upper[0]; ++i)
    for (std::int64_t j = p.lower[1]; j < p.upper[1]; ++j) f(i, j, acc);
  result = acc;
}

template <class F, class T>
void parallel_reduce(const TeamThreadRangeBoundaries& p, F f, T& result) {
  T acc = T();
  stub_detail::reduce_loop_1d<TeamThreadRangeBoundaries>(0, p.count, f, acc);
  result = acc;
}

template <class F, class Reducer>
auto parallel_reduce(const TeamThreadRangeBoundaries& p, F f, Reducer r)
    -> decltype(void(Reducer::identity())) {
  auto acc = Reducer::identity();
  stub_detail::reduce_loop_1d<TeamThreadRangeBoundaries>(0, p.count, f, acc);
  r.value = acc;
}

template <class F, class T>
void parallel_reduce(const ThreadVectorRangeBoundaries& p, F f, T& result) {
  T acc = T();
  stub_detail::reduce_loop_1d<ThreadVectorRangeBoundaries>(0, p.count, f, acc);
  result = acc;
}

template <class F, class Reducer>
auto parallel_reduce(const ThreadVectorRangeBoundaries& p, F f, Reducer r)
    -> decltype(void(Reducer::identity())) {
  auto acc = Reducer::identity();
  stub_detail::reduce_loop_1d<ThreadVectorRangeBoundaries>(0, p.count, f, acc);
  r.value = acc;
}

template <class Scope, class F>
void single(Scope, F f) {
  f();
}

}  // namespace Kokkos
