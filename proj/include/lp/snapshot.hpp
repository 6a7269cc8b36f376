#pragma once

// Binary state files. Layout (little-endian):
//   8-byte magic, u32 n, f64 L, f64 alpha, f64 t, f64 phase,
//   n^3 complex doubles for psi (x fastest), n^3 complex doubles for the field
//   in FFT index order.
// "LPSNAP1\0" stores phi(k); "LPPOLR1\0" stores P + iQ on the spatial grid.

#include "lp/dynamics.hpp"

#include <array>
#include <string>

namespace lp {

enum class SnapshotKind { fourier, polarization };

inline constexpr std::array<char, 8> kFourierMagic{'L', 'P', 'S', 'N', 'A', 'P', '1', '\0'};
inline constexpr std::array<char, 8> kPolarizationMagic{'L', 'P', 'P', 'O', 'L', 'R', '1', '\0'};

struct Snapshot {
  SnapshotKind kind = SnapshotKind::fourier;
  int n = 0;
  double L = 0.0;
  double alpha = 1.0;
  double t = 0.0;
  double phase = 0.0;
  ComplexField psi;
  ComplexField field;
};

Snapshot snapshot_of(const SimState& state);
Snapshot snapshot_of(const PolarizationState& state);

/// Requires the grid to match the snapshot's n and L.
SimState to_sim_state(const Snapshot& snap, GridPtr grid);
PolarizationState to_polarization_state(const Snapshot& snap, GridPtr grid);

std::string encode_snapshot(const Snapshot& snap);
/// Throws ValidationError on bad magic, truncation or trailing bytes.
Snapshot decode_snapshot(const std::string& bytes);

void write_snapshot(const std::string& path, const Snapshot& snap);
Snapshot read_snapshot(const std::string& path);

}  // namespace lp
