#pragma once

// On-disk formats: binary state snapshots (text header + little-endian f64
// arrays), 8-bit PGM slice images, CSV tables, and atomically written run
// manifests.  Layouts are documented in the repository README and versioned
// through the snapshot magic line.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "field_state.hpp"
#include "lattice.hpp"

namespace higgsflow {

// Snapshot layout, version 1:
//   line 1: "HIGGSFLOW-SNAPSHOT 1"
//   line 2: n N0 N1 N2 q cut1
//   line 3: L0 L1 L2 eps time           (decimal, round-trip precision)
//   line 4: "DATA"
//   then little-endian float64: u as re/im pairs (2·sites values), followed
//   by the dynamical connection, axis by axis (n·sites values).
void write_snapshot(const std::string& path, const TorusLattice& lat, const FieldState& st);

struct Snapshot {
    TorusLattice lattice;
    FieldState state;
};

// Reads and validates a version-1 snapshot; throws on magic/shape/finiteness
// violations.
Snapshot read_snapshot(const std::string& path);

// 8-bit binary PGM of a scalar field slice, max-normalized (all-zero fields
// map to black).  For n = 3 the slice is {x₂ = level·h}; for n = 2 the level
// is ignored and the whole plane is written.
void write_pgm_slice(const std::string& path, const TorusLattice& lat,
                     std::span<const double> field, int level);

// Minimal CSV writer: one header, rows of doubles at round-trip precision.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, std::span<const std::string> columns);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void write_row(std::span<const double> values);
    void close();

  private:
    struct Impl;
    Impl* impl_;
};

// Sparse export of one spatial Jacobian sample: plaquettes whose magnitude
// exceeds `threshold_frac` times the sample maximum, as
// t,plane,i0,i1,i2,value rows appended to the writer.
void append_sparse_plaquettes(CsvWriter& csv, const TorusLattice& lat, double t,
                              const PlaqField& J, double threshold_frac = 1e-3);

// Flat ordered key→value manifest.  write_manifest writes to a temporary in
// the same directory and renames, so a manifest is either absent or complete.
void write_manifest(const std::string& path,
                    const std::map<std::string, std::string>& entries);
std::map<std::string, std::string> read_manifest(const std::string& path);

}  // namespace higgsflow
