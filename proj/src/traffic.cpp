#include "tofa/traffic.hpp"

#include "tofa/rng.hpp"

#include <numeric>
#include <stdexcept>

namespace tofa {

bool is_collective(EventKind kind) {
  return kind != EventKind::send;
}

EventKind event_kind_from_string(const std::string& name) {
  if (name == "send") return EventKind::send;
  if (name == "bcast") return EventKind::bcast;
  if (name == "reduce") return EventKind::reduce;
  if (name == "allreduce") return EventKind::allreduce;
  if (name == "allgather") return EventKind::allgather;
  if (name == "alltoall") return EventKind::alltoall;
  if (name == "barrier") return EventKind::barrier;
  throw std::invalid_argument("unknown event kind: " + name);
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::send: return "send";
    case EventKind::bcast: return "bcast";
    case EventKind::reduce: return "reduce";
    case EventKind::allreduce: return "allreduce";
    case EventKind::allgather: return "allgather";
    case EventKind::alltoall: return "alltoall";
    case EventKind::barrier: return "barrier";
  }
  return "unknown";
}

Communicator Communicator::world(int n_procs) {
  Communicator c;
  c.id = 0;
  c.ranks.resize(static_cast<std::size_t>(n_procs));
  std::iota(c.ranks.begin(), c.ranks.end(), 0);
  return c;
}

int Communicator::world_rank(int comm_rank) const {
  if (comm_rank < 0 || comm_rank >= size()) {
    throw std::out_of_range("rank " + std::to_string(comm_rank) +
                            " outside communicator of size " + std::to_string(size()));
  }
  return ranks[static_cast<std::size_t>(comm_rank)];
}

TrafficMatrix::TrafficMatrix(int n_procs)
    : n_(n_procs), vol_(Matrix::Zero(n_procs, n_procs)), msg_(Matrix::Zero(n_procs, n_procs)) {
  if (n_procs < 1) throw std::invalid_argument("process count must be >= 1");
}

void TrafficMatrix::add_message(int world_src, int world_dst, double bytes) {
  if (world_src < 0 || world_src >= n_ || world_dst < 0 || world_dst >= n_) {
    throw std::out_of_range("world rank outside [0, N)");
  }
  if (world_src == world_dst) {
    throw std::invalid_argument("self-messages carry no inter-node traffic");
  }
  if (bytes < 0.0) throw std::invalid_argument("message size must be >= 0");
  vol_(world_src, world_dst) += bytes;
  vol_(world_dst, world_src) += bytes;
  msg_(world_src, world_dst) += 1.0;
  msg_(world_dst, world_src) += 1.0;
}

const Matrix& edge_weights(const TrafficMatrix& m, EdgeWeightKind kind) {
  return kind == EdgeWeightKind::volume ? m.vol() : m.msg();
}

void record_p2p(TrafficMatrix& m, const Communicator& comm, int src, int dst,
                double bytes) {
  if (src == dst) throw std::invalid_argument("point-to-point requires src != dst");
  m.add_message(comm.world_rank(src), comm.world_rank(dst), bytes);
}

namespace {

int ceil_log2(int p) {
  int rounds = 0;
  while ((1 << rounds) < p) ++rounds;
  return rounds;
}

// Binomial tree rooted at `root` in communicator ranks: in round r the first
// 2^r virtual ranks each feed the peer 2^r above them. The reduce tree is the
// mirror image, which lands on the same pairs.
template <typename Emit>
void binomial_tree(int p, int root, Emit&& emit) {
  for (int mask = 1; mask < p; mask <<= 1) {
    for (int vrank = 0; vrank < mask; ++vrank) {
      const int partner = vrank + mask;
      if (partner >= p) continue;
      emit((vrank + root) % p, (partner + root) % p);
    }
  }
}

template <typename Emit>
void xor_rounds(int p, Emit&& emit) {
  const int rounds = ceil_log2(p);
  for (int r = 0; r < rounds; ++r) {
    const int mask = 1 << r;
    for (int rank = 0; rank < p; ++rank) {
      const int partner = rank ^ mask;
      if (partner >= p) continue;
      emit(rank, partner);
    }
  }
}

}  // namespace

void expand_collective(TrafficMatrix& m, const TraceEvent& ev, const Communicator& comm) {
  if (!is_collective(ev.kind)) {
    throw std::invalid_argument("expand_collective requires a collective event");
  }
  const int p = comm.size();
  if (ev.bytes < 0.0) throw std::invalid_argument("collective payload must be >= 0");
  if (p < 2) return;  // nothing leaves the node

  const auto emit = [&](int from, int to, double bytes) {
    m.add_message(comm.world_rank(from), comm.world_rank(to), bytes);
  };

  switch (ev.kind) {
    case EventKind::bcast:
    case EventKind::reduce: {
      const int root = ev.src;
      if (root < 0 || root >= p) {
        throw std::out_of_range("collective root outside communicator");
      }
      binomial_tree(p, root, [&](int parent, int child) {
        if (ev.kind == EventKind::bcast) {
          emit(parent, child, ev.bytes);
        } else {
          emit(child, parent, ev.bytes);
        }
      });
      break;
    }
    case EventKind::allreduce:
      // Each round partner pair exchanges the full payload in both directions.
      xor_rounds(p, [&](int rank, int partner) { emit(rank, partner, ev.bytes); });
      break;
    case EventKind::allgather:
      // Ring: every rank forwards one block per round for P-1 rounds.
      for (int round = 0; round < p - 1; ++round) {
        for (int rank = 0; rank < p; ++rank) {
          emit(rank, (rank + 1) % p, ev.bytes);
        }
      }
      break;
    case EventKind::alltoall:
      // Pairwise exchange: step s sends each rank's block to rank + s.
      for (int step = 1; step < p; ++step) {
        for (int rank = 0; rank < p; ++rank) {
          emit(rank, (rank + step) % p, ev.bytes);
        }
      }
      break;
    case EventKind::barrier:
      xor_rounds(p, [&](int rank, int partner) { emit(rank, partner, 0.0); });
      break;
    case EventKind::send:
      break;  // unreachable
  }
}

TrafficMatrix synthetic_band(int n_procs, int k, double bytes) {
  if (n_procs < 2) throw std::invalid_argument("synthetic patterns need n >= 2");
  if (k < 1 || k >= n_procs) throw std::invalid_argument("band width must satisfy 1 <= k < n");
  TrafficMatrix m(n_procs);
  for (int i = 0; i < n_procs; ++i) {
    for (int j = i + 1; j <= std::min(n_procs - 1, i + k); ++j) {
      m.add_message(i, j, bytes);
    }
  }
  return m;
}

TrafficMatrix synthetic_block(int n_procs, int block, double bytes) {
  if (n_procs < 2) throw std::invalid_argument("synthetic patterns need n >= 2");
  if (block < 2 || block > n_procs) {
    throw std::invalid_argument("block size must satisfy 2 <= b <= n");
  }
  TrafficMatrix m(n_procs);
  for (int i = 0; i < n_procs; ++i) {
    for (int j = i + 1; j < n_procs; ++j) {
      if (i / block == j / block) m.add_message(i, j, bytes);
    }
  }
  return m;
}

TrafficMatrix synthetic_irregular(int n_procs, double density, std::uint64_t seed,
                                  double bytes) {
  if (n_procs < 2) throw std::invalid_argument("synthetic patterns need n >= 2");
  if (!(density > 0.0) || density > 1.0) {
    throw std::invalid_argument("density must lie in (0, 1]");
  }
  TrafficMatrix m(n_procs);
  auto rng = seeded_rng(seed, /*stream=*/0x1a2e);
  // No traffic on or next to the main diagonal, mimicking patterns whose
  // partners are far from neighbouring ranks.
  for (int i = 0; i < n_procs; ++i) {
    for (int j = i + 2; j < n_procs; ++j) {
      if (uniform01(rng) < density) m.add_message(i, j, bytes);
    }
  }
  return m;
}

}  // namespace tofa
