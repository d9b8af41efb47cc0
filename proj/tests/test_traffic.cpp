#include "tofa/traffic.hpp"

#include "tofa/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace tofa;

namespace {

// Independent per-kind predictions of (message count, bytes on the wire) for
// the fixed algorithm table. Written as plain loops so the checks do not
// share code with the implementation.
struct Prediction {
  double messages = 0.0;
  double bytes = 0.0;
};

Prediction predict(EventKind kind, int p, double m) {
  Prediction out;
  const auto xor_pairs = [&](double per_message_bytes) {
    int rounds = 0;
    while ((1 << rounds) < p) ++rounds;
    for (int r = 0; r < rounds; ++r) {
      for (int rank = 0; rank < p; ++rank) {
        if ((rank ^ (1 << r)) < p) {
          out.messages += 1;
          out.bytes += per_message_bytes;
        }
      }
    }
  };
  switch (kind) {
    case EventKind::bcast:
    case EventKind::reduce:
      out.messages = p - 1;
      out.bytes = (p - 1) * m;
      break;
    case EventKind::allreduce:
      xor_pairs(m);
      break;
    case EventKind::allgather:
    case EventKind::alltoall:
      out.messages = static_cast<double>(p) * (p - 1);
      out.bytes = out.messages * m;
      break;
    case EventKind::barrier:
      xor_pairs(0.0);
      break;
    case EventKind::send:
      break;
  }
  return out;
}

}  // namespace

TEST_CASE("record_p2p accumulates two-directional sums") {
  const Communicator world = Communicator::world(4);

  SUBCASE("single event") {
    TrafficMatrix m(4);
    record_p2p(m, world, 0, 1, 8.0);
    CHECK(m.vol()(0, 1) == 8.0);
    CHECK(m.vol()(1, 0) == 8.0);
    CHECK(m.msg()(0, 1) == 1.0);
    CHECK(m.msg()(1, 0) == 1.0);
    CHECK(m.vol()(0, 2) == 0.0);
  }

  SUBCASE("both directions fold into one entry") {
    TrafficMatrix m(4);
    record_p2p(m, world, 0, 1, 3.0);
    record_p2p(m, world, 1, 0, 3.0);
    CHECK(m.vol()(0, 1) == 6.0);
    CHECK(m.msg()(0, 1) == 2.0);
  }

  SUBCASE("sub-communicator ranks translate to world ranks") {
    TrafficMatrix m(8);
    Communicator sub{1, {4, 7}};
    record_p2p(m, sub, 0, 1, 5.0);
    CHECK(m.vol()(4, 7) == 5.0);
    CHECK(m.vol()(7, 4) == 5.0);
  }

  SUBCASE("errors") {
    TrafficMatrix m(4);
    CHECK_THROWS_AS(record_p2p(m, world, 0, 0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(record_p2p(m, world, 0, 4, 1.0), std::out_of_range);
    CHECK_THROWS_AS(record_p2p(m, world, 0, 1, -1.0), std::invalid_argument);
  }
}

TEST_CASE("collective expansion examples") {
  SUBCASE("binomial bcast, P=4 root 0") {
    TrafficMatrix m(4);
    expand_collective(m, {EventKind::bcast, 0, -1, 10.0, 0}, Communicator::world(4));
    CHECK(m.vol()(0, 1) == 10.0);
    CHECK(m.vol()(0, 2) == 10.0);
    CHECK(m.vol()(1, 3) == 10.0);
    CHECK(m.vol()(2, 3) == 0.0);
    CHECK(m.total_volume() == 2 * 3 * 10.0);
  }

  SUBCASE("binomial reduce hits the same pairs") {
    TrafficMatrix b(4), r(4);
    expand_collective(b, {EventKind::bcast, 0, -1, 7.0, 0}, Communicator::world(4));
    expand_collective(r, {EventKind::reduce, 0, -1, 7.0, 0}, Communicator::world(4));
    CHECK(b.vol() == r.vol());
  }

  SUBCASE("recursive-doubling allreduce, P=4") {
    TrafficMatrix m(4);
    expand_collective(m, {EventKind::allreduce, 0, -1, 5.0, 0}, Communicator::world(4));
    for (const auto& [i, j] : std::vector<std::pair<int, int>>{{0, 1}, {2, 3}, {0, 2}, {1, 3}}) {
      CHECK(m.vol()(i, j) == 2 * 5.0);
      CHECK(m.msg()(i, j) == 2.0);
    }
    CHECK(m.vol()(0, 3) == 0.0);
  }

  SUBCASE("dissemination barrier, P=2") {
    TrafficMatrix m(2);
    expand_collective(m, {EventKind::barrier, 0, -1, 0.0, 0}, Communicator::world(2));
    CHECK(m.total_volume() == 0.0);
    CHECK(m.msg()(0, 1) == 2.0);
  }

  SUBCASE("non-collective kind is rejected") {
    TrafficMatrix m(2);
    CHECK_THROWS_AS(expand_collective(m, {EventKind::send, 0, 1, 1.0, 0}, Communicator::world(2)),
                    std::invalid_argument);
  }

  SUBCASE("root out of range") {
    TrafficMatrix m(4);
    CHECK_THROWS_AS(expand_collective(m, {EventKind::bcast, 4, -1, 1.0, 0}, Communicator::world(4)),
                    std::out_of_range);
  }

  SUBCASE("binomial tree with a nonzero root") {
    TrafficMatrix m(5);
    expand_collective(m, {EventKind::bcast, 2, -1, 1.0, 0}, Communicator::world(5));
    CHECK(m.total_messages() == 2 * 4.0);  // P-1 messages
    CHECK(m.msg()(2, 3) > 0.0);            // root feeds its virtual rank 1
  }
}

TEST_CASE("collective conservation matches the algorithm table for P in 2..9") {
  const double m_bytes = 3.0;
  for (const EventKind kind : {EventKind::bcast, EventKind::reduce, EventKind::allreduce,
                               EventKind::allgather, EventKind::alltoall, EventKind::barrier}) {
    for (int p = 2; p <= 9; ++p) {
      TrafficMatrix m(p);
      expand_collective(m, {kind, 0, -1, m_bytes, 0}, Communicator::world(p));
      const Prediction want = predict(kind, p, m_bytes);
      CHECK(m.total_volume() == 2.0 * want.bytes);
      CHECK(m.total_messages() == 2.0 * want.messages);
    }
  }
}

TEST_CASE("traffic matrices stay symmetric with a zero diagonal") {
  auto rng = seeded_rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(uniform_below(rng, 9));
    TrafficMatrix m(n);
    const Communicator world = Communicator::world(n);
    for (int ev = 0; ev < 50; ++ev) {
      const auto kind = static_cast<EventKind>(uniform_below(rng, 7));
      const double bytes = static_cast<double>(uniform_below(rng, 1000));
      if (kind == EventKind::send) {
        const int src = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n)));
        int dst = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n)));
        if (dst == src) dst = (dst + 1) % n;
        record_p2p(m, world, src, dst, bytes);
      } else {
        const int root = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n)));
        expand_collective(m, {kind, root, -1, bytes, 0}, world);
      }
    }
    CHECK(m.vol() == m.vol().transpose().eval());
    CHECK(m.msg() == m.msg().transpose().eval());
    CHECK(m.vol().diagonal().sum() == 0.0);
    CHECK(m.msg().diagonal().sum() == 0.0);
    // volume implies messages
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (m.vol()(i, j) > 0.0) CHECK(m.msg()(i, j) > 0.0);
      }
    }
  }
}

TEST_CASE("sub-communicator traffic equals pre-translated world traffic") {
  auto rng = seeded_rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 8;
    Communicator sub{1, {}};
    for (int r = 0; r < n; ++r) {
      if (uniform01(rng) < 0.6) sub.ranks.push_back(r);
    }
    if (sub.size() < 2) continue;

    TrafficMatrix via_sub(n), via_world(n);
    const Communicator world = Communicator::world(n);
    for (int ev = 0; ev < 30; ++ev) {
      const int src = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(sub.size())));
      int dst = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(sub.size())));
      if (dst == src) dst = (dst + 1) % sub.size();
      const double bytes = static_cast<double>(uniform_below(rng, 100));
      record_p2p(via_sub, sub, src, dst, bytes);
      record_p2p(via_world, world, sub.ranks[static_cast<std::size_t>(src)],
                 sub.ranks[static_cast<std::size_t>(dst)], bytes);
    }
    CHECK(via_sub.vol() == via_world.vol());
    CHECK(via_sub.msg() == via_world.msg());
  }
}

TEST_CASE("synthetic generators") {
  SUBCASE("band(1) n=4") {
    const TrafficMatrix m = synthetic_band(4, 1, 10.0);
    for (int i = 0; i < 3; ++i) CHECK(m.vol()(i, i + 1) == 10.0);
    CHECK(m.vol()(0, 2) == 0.0);
    CHECK(m.vol()(0, 3) == 0.0);
  }

  SUBCASE("band(n-1) fills every off-diagonal") {
    const TrafficMatrix m = synthetic_band(5, 4, 2.0);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        CHECK(m.vol()(i, j) == (i == j ? 0.0 : 2.0));
      }
    }
  }

  SUBCASE("block(2) n=4 pairs within blocks only") {
    const TrafficMatrix m = synthetic_block(4, 2, 4.0);
    CHECK(m.vol()(0, 1) == 4.0);
    CHECK(m.vol()(2, 3) == 4.0);
    CHECK(m.vol()(1, 2) == 0.0);
  }

  SUBCASE("irregular is deterministic per seed and avoids the diagonal band") {
    const TrafficMatrix a = synthetic_irregular(85, 0.1, 7, 1.0);
    const TrafficMatrix b = synthetic_irregular(85, 0.1, 7, 1.0);
    CHECK(a.vol() == b.vol());
    CHECK(a.total_volume() > 0.0);

    const TrafficMatrix c = synthetic_irregular(85, 0.1, 8, 1.0);
    CHECK(a.vol() != c.vol());

    for (int i = 0; i < 85; ++i) {
      CHECK(a.vol()(i, i) == 0.0);
      if (i + 1 < 85) CHECK(a.vol()(i, i + 1) == 0.0);
    }
  }

  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(synthetic_band(4, 4, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(synthetic_band(1, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(synthetic_irregular(4, 0.0, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(synthetic_irregular(4, 1.5, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(synthetic_block(4, 1, 1.0), std::invalid_argument);
  }
}
