#pragma once

#include "tofa/traffic.hpp"
#include "tofa/types.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace tofa {

struct TraceParseError : std::runtime_error {
  TraceParseError(const std::string& what, int line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line(line) {}
  int line;
};

// Trace file: JSON lines. The first object is a header declaring the world
// size and any extra communicators:
//   {"n": 8, "communicators": [{"id": 1, "ranks": [0, 2, 4]}]}
// followed by one event object per line, e.g.
//   {"kind": "send", "src": 0, "dst": 1, "bytes": 10, "comm": 0}
//   {"kind": "bcast", "root": 0, "bytes": 128}
// Communicator 0 is always the world communicator and cannot be redeclared.
TrafficMatrix ingest_trace(const std::filesystem::path& path);

// Matrix file: first line n, then n comma-separated rows.
void save_matrix_csv(const Matrix& m, const std::filesystem::path& path);
Matrix load_matrix_csv(const std::filesystem::path& path);

// Byte-volume heatmap: binary PGM (P5), linear scale from white (no traffic)
// to black (the maximum entry), plus the raw values as a CSV sidecar.
void emit_heatmap(const TrafficMatrix& m, const std::filesystem::path& pgm_path,
                  const std::filesystem::path& csv_path);

/// Canonical number formatting shared by all CSV writers (integers stay integral).
std::string format_number(double v);

}  // namespace tofa
