#include "lp/snapshot.hpp"

#include "lp/errors.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lp {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  } else {
    return v;
  }
}

template <class T>
void put(std::string& out, T v) {
  const T le = to_little(v);
  char buf[sizeof(T)];
  std::memcpy(buf, &le, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw ValidationError("snapshot: file is truncated");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(v);
  }

  std::array<char, 8> magic() {
    if (bytes_.size() < 8) throw ValidationError("snapshot: file is truncated");
    std::array<char, 8> m{};
    std::memcpy(m.data(), bytes_.data(), 8);
    pos_ = 8;
    return m;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

void put_field(std::string& out, const ComplexField& f) {
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    put(out, f(i).real());
    put(out, f(i).imag());
  }
}

ComplexField get_field(Reader& r, std::size_t count) {
  ComplexField f(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const double re = r.get<double>();
    const double im = r.get<double>();
    f(static_cast<Eigen::Index>(i)) = Complex(re, im);
  }
  return f;
}

void require_grid(const Snapshot& s, const SpatialGrid& grid) {
  if (grid.n() != s.n || grid.box_length() != s.L) {
    std::ostringstream msg;
    msg << "snapshot grid (n = " << s.n << ", L = " << s.L << ") does not match (n = " << grid.n()
        << ", L = " << grid.box_length() << ")";
    throw ValidationError(msg.str());
  }
}

}  // namespace

Snapshot snapshot_of(const SimState& state) {
  Snapshot s;
  s.kind = SnapshotKind::fourier;
  s.n = state.psi.grid->n();
  s.L = state.psi.grid->box_length();
  s.alpha = state.alpha;
  s.t = state.t;
  s.phase = state.phase;
  s.psi = state.psi.values;
  s.field = state.phi.values;
  return s;
}

Snapshot snapshot_of(const PolarizationState& state) {
  Snapshot s;
  s.kind = SnapshotKind::polarization;
  s.n = state.psi.grid->n();
  s.L = state.psi.grid->box_length();
  s.alpha = state.alpha;
  s.t = state.t;
  s.phase = state.phase;
  s.psi = state.psi.values;
  s.field.resize(state.pq.P.size());
  s.field.real() = state.pq.P;
  s.field.imag() = state.pq.Q;
  return s;
}

SimState to_sim_state(const Snapshot& snap, GridPtr grid) {
  if (snap.kind != SnapshotKind::fourier) throw ValidationError("snapshot holds a polarization field");
  require_grid(snap, *grid);
  SimState s;
  s.psi = {grid, snap.psi};
  s.phi = {grid, snap.field};
  s.alpha = snap.alpha;
  s.t = snap.t;
  s.phase = snap.phase;
  return s;
}

PolarizationState to_polarization_state(const Snapshot& snap, GridPtr grid) {
  if (snap.kind != SnapshotKind::polarization) throw ValidationError("snapshot holds a Fourier field");
  require_grid(snap, *grid);
  PolarizationState s;
  s.psi = {grid, snap.psi};
  s.pq = {grid, snap.field.real(), snap.field.imag()};
  s.alpha = snap.alpha;
  s.t = snap.t;
  s.phase = snap.phase;
  return s;
}

std::string encode_snapshot(const Snapshot& snap) {
  const std::size_t count = static_cast<std::size_t>(snap.n) * snap.n * snap.n;
  if (snap.n <= 0 || static_cast<std::size_t>(snap.psi.size()) != count ||
      static_cast<std::size_t>(snap.field.size()) != count) {
    throw ValidationError("snapshot: field sizes do not match n^3");
  }
  std::string out;
  out.reserve(8 + 4 + 4 * 8 + 32 * count);
  const auto& magic = snap.kind == SnapshotKind::fourier ? kFourierMagic : kPolarizationMagic;
  out.append(magic.data(), magic.size());
  put(out, static_cast<std::uint32_t>(snap.n));
  put(out, snap.L);
  put(out, snap.alpha);
  put(out, snap.t);
  put(out, snap.phase);
  put_field(out, snap.psi);
  put_field(out, snap.field);
  return out;
}

Snapshot decode_snapshot(const std::string& bytes) {
  Reader r(bytes);
  Snapshot s;
  const auto magic = r.magic();
  if (magic == kFourierMagic) {
    s.kind = SnapshotKind::fourier;
  } else if (magic == kPolarizationMagic) {
    s.kind = SnapshotKind::polarization;
  } else {
    throw ValidationError("snapshot: unrecognised magic");
  }
  const std::uint32_t n = r.get<std::uint32_t>();
  if (n < 8 || n > 512) throw ValidationError("snapshot: grid size out of range");
  s.n = static_cast<int>(n);
  s.L = r.get<double>();
  s.alpha = r.get<double>();
  s.t = r.get<double>();
  s.phase = r.get<double>();
  const std::size_t count = static_cast<std::size_t>(n) * n * n;
  s.psi = get_field(r, count);
  s.field = get_field(r, count);
  if (!r.done()) throw ValidationError("snapshot: trailing bytes after payload");
  return s;
}

void write_snapshot(const std::string& path, const Snapshot& snap) {
  const std::string bytes = encode_snapshot(snap);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write snapshot '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("failed writing snapshot '" + path + "'");
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read snapshot '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return decode_snapshot(buf.str());
}

}  // namespace lp
