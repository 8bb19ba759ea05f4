#pragma once

#include "turbkit/integrator.hpp"

#include <string>

namespace turbkit {

// Binary layout, little endian:
//   magic "TKSC" | u16 version | u8 dim | u32 N | f64 nu | f64 t | u64 step |
//   u32 rng length | rng bytes | u components (re, im) | Z components | u32 CRC-32
// The CRC covers every byte before it. Snapshot files use the same layout
// with an empty rng blob; pressure goes to a companion "TKSP" file:
//   magic "TKSP" | u16 version | u8 dim | u32 N | f64 t | u64 step | p (re, im) | u32 CRC-32
inline constexpr std::uint16_t checkpoint_version = 1;

struct LoadedCheckpoint {
    SimState state;
    double nu = 0;
};

void save_checkpoint(const std::string& path, const SimState& state, double nu);
LoadedCheckpoint load_checkpoint(const std::string& path);

void save_snapshot(const std::string& path, const Snapshot& snap, double nu);
// reads velocity and noise; pressure lives in a separate file
Snapshot load_snapshot(const std::string& path, double* nu = nullptr);

void save_pressure(const std::string& path, const ScalarField& p, double t, std::uint64_t step);
ScalarField load_pressure(const std::string& path, double* t = nullptr, std::uint64_t* step = nullptr);

}  // namespace turbkit
