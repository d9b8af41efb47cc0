#pragma once

#include "tofa/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tofa {

enum class EventKind { send, bcast, reduce, allreduce, allgather, alltoall, barrier };

bool is_collective(EventKind kind);
EventKind event_kind_from_string(const std::string& name);
std::string to_string(EventKind kind);

// Ordered list of world ranks; a rank's position is its rank within the
// communicator. Communicator 0 is MPI_COMM_WORLD.
struct Communicator {
  int id = 0;
  std::vector<int> ranks;

  static Communicator world(int n_procs);
  int size() const { return static_cast<int>(ranks.size()); }

  /// Translates a communicator rank to the world rank, checking bounds.
  int world_rank(int comm_rank) const;
};

// One traffic-initiating MPI call. `src` doubles as the collective root;
// `dst` is meaningful for point-to-point only.
struct TraceEvent {
  EventKind kind = EventKind::send;
  int src = 0;
  int dst = -1;
  double bytes = 0.0;
  int comm = 0;
};

// Communication graph G: paired byte-volume (G_v) and message-count (G_m)
// matrices over world ranks. Entry (i, j) carries the two-directional sum,
// so both matrices stay symmetric with a zero diagonal. Accumulation is
// single-writer; a finished matrix can be shared across readers.
class TrafficMatrix {
 public:
  explicit TrafficMatrix(int n_procs);

  int n() const { return n_; }
  const Matrix& vol() const { return vol_; }
  const Matrix& msg() const { return msg_; }

  /// Accumulates one world-rank message: bytes onto G_v, one count onto G_m.
  void add_message(int world_src, int world_dst, double bytes);

  double total_volume() const { return vol_.sum(); }
  double total_messages() const { return msg_.sum(); }

 private:
  int n_;
  Matrix vol_;
  Matrix msg_;
};

/// Which matrix the mapping engines treat as edge weights.
enum class EdgeWeightKind { volume, messages };

const Matrix& edge_weights(const TrafficMatrix& m, EdgeWeightKind kind);

void record_p2p(TrafficMatrix& m, const Communicator& comm, int src, int dst,
                double bytes);

// Expands a collective into pairwise traffic following the fixed algorithm
// table: bcast/reduce binomial tree, allreduce recursive doubling, allgather
// ring, alltoall pairwise exchange, barrier dissemination (zero-byte
// messages). Non-power-of-two sizes partner with rank XOR 2^r, skipping
// partners >= P.
void expand_collective(TrafficMatrix& m, const TraceEvent& ev, const Communicator& comm);

// Synthetic generators used in place of application traces.
TrafficMatrix synthetic_band(int n_procs, int k, double bytes);
TrafficMatrix synthetic_block(int n_procs, int block, double bytes);
TrafficMatrix synthetic_irregular(int n_procs, double density, std::uint64_t seed,
                                  double bytes);

}  // namespace tofa
