#include "tofa/trace_io.hpp"

#include "tofa/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace tofa;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("ingest_trace") {
  TempDir dir("tofa_trace_test");

  SUBCASE("empty trace yields zero matrices") {
    const auto p = write_file(dir.path, "empty.jsonl", "{\"n\": 4}\n");
    const TrafficMatrix m = ingest_trace(p);
    CHECK(m.n() == 4);
    CHECK(m.total_volume() == 0.0);
    CHECK(m.total_messages() == 0.0);
  }

  SUBCASE("single send") {
    const auto p = write_file(dir.path, "send.jsonl",
                              "{\"n\": 4}\n"
                              "{\"kind\": \"send\", \"src\": 0, \"dst\": 1, \"bytes\": 10}\n");
    const TrafficMatrix m = ingest_trace(p);
    CHECK(m.vol()(0, 1) == 10.0);
  }

  SUBCASE("bcast over 8 ranks sums to 2(P-1) bytes") {
    const auto p = write_file(dir.path, "bcast.jsonl",
                              "{\"n\": 8}\n"
                              "{\"kind\": \"bcast\", \"root\": 0, \"bytes\": 1}\n");
    CHECK(ingest_trace(p).total_volume() == 14.0);
  }

  SUBCASE("communicator rank translation") {
    const auto p = write_file(
        dir.path, "comm.jsonl",
        "{\"n\": 8, \"communicators\": [{\"id\": 1, \"ranks\": [4, 7]}]}\n"
        "{\"kind\": \"send\", \"src\": 0, \"dst\": 1, \"bytes\": 5, \"comm\": 1}\n");
    CHECK(ingest_trace(p).vol()(4, 7) == 5.0);
  }

  SUBCASE("parse errors carry line numbers") {
    const auto p = write_file(dir.path, "bad.jsonl",
                              "{\"n\": 4}\n"
                              "{\"kind\": \"send\", \"src\": 0, \"dst\": 1, \"bytes\": 1}\n"
                              "not json\n");
    try {
      ingest_trace(p);
      FAIL("expected TraceParseError");
    } catch (const TraceParseError& e) {
      CHECK(e.line == 3);
    }
  }

  SUBCASE("undeclared communicator") {
    const auto p = write_file(dir.path, "undeclared.jsonl",
                              "{\"n\": 4}\n"
                              "{\"kind\": \"send\", \"src\": 0, \"dst\": 1, \"bytes\": 1, \"comm\": 3}\n");
    CHECK_THROWS_AS(ingest_trace(p), TraceParseError);
  }

  SUBCASE("header is mandatory") {
    const auto p = write_file(dir.path, "headerless.jsonl",
                              "{\"kind\": \"send\", \"src\": 0, \"dst\": 1, \"bytes\": 1}\n");
    CHECK_THROWS_AS(ingest_trace(p), TraceParseError);
  }

  SUBCASE("permuting event lines leaves the matrix unchanged") {
    std::vector<std::string> events{
        "{\"kind\": \"send\", \"src\": 0, \"dst\": 1, \"bytes\": 10}",
        "{\"kind\": \"bcast\", \"root\": 2, \"bytes\": 64}",
        "{\"kind\": \"allreduce\", \"bytes\": 8}",
        "{\"kind\": \"send\", \"src\": 3, \"dst\": 2, \"bytes\": 1}",
        "{\"kind\": \"barrier\"}",
    };
    const auto render = [&](const std::vector<std::string>& evs) {
      std::string body = "{\"n\": 5}\n";
      for (const auto& e : evs) body += e + "\n";
      return body;
    };
    const TrafficMatrix base =
        ingest_trace(write_file(dir.path, "order_a.jsonl", render(events)));

    auto rng = seeded_rng(4);
    for (int trial = 0; trial < 5; ++trial) {
      for (std::size_t i = events.size(); i > 1; --i) {
        std::swap(events[i - 1], events[uniform_below(rng, i)]);
      }
      const TrafficMatrix shuffled =
          ingest_trace(write_file(dir.path, "order_b.jsonl", render(events)));
      CHECK(base.vol() == shuffled.vol());
      CHECK(base.msg() == shuffled.msg());
    }
  }
}

TEST_CASE("matrix csv round trip") {
  TempDir dir("tofa_matrix_test");
  Matrix m(3, 3);
  m << 0, 1.5, 2, 1.5, 0, 1e9, 2, 1e9, 0;
  const fs::path p = dir.path / "m.csv";
  save_matrix_csv(m, p);

  const std::string text = slurp(p);
  CHECK(text.rfind("3\n", 0) == 0);
  CHECK(text.find("1000000000") != std::string::npos);  // integers stay integral

  CHECK(load_matrix_csv(p) == m);
}

TEST_CASE("heatmap rendering") {
  TempDir dir("tofa_heatmap_test");

  const auto pixels = [&](const fs::path& p, int n) {
    const std::string bytes = slurp(p);
    const std::string header = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
    REQUIRE(bytes.rfind(header, 0) == 0);
    REQUIRE(bytes.size() == header.size() + static_cast<std::size_t>(n) * n);
    return bytes.substr(header.size());
  };

  SUBCASE("zero matrix renders all white") {
    TrafficMatrix m(3);
    emit_heatmap(m, dir.path / "z.pgm", dir.path / "z.csv");
    for (const char px : pixels(dir.path / "z.pgm", 3)) {
      CHECK(static_cast<unsigned char>(px) == 255);
    }
  }

  SUBCASE("single pair gives exactly two darkest pixels") {
    TrafficMatrix m(4);
    m.add_message(1, 2, 100.0);
    emit_heatmap(m, dir.path / "s.pgm", dir.path / "s.csv");
    const std::string px = pixels(dir.path / "s.pgm", 4);
    int dark = 0;
    for (const char c : px) {
      if (static_cast<unsigned char>(c) == 0) ++dark;
    }
    CHECK(dark == 2);
    CHECK(static_cast<unsigned char>(px[static_cast<std::size_t>(1 * 4 + 2)]) == 0);
    CHECK(static_cast<unsigned char>(px[static_cast<std::size_t>(2 * 4 + 1)]) == 0);
  }

  SUBCASE("band pattern darkens next to the diagonal") {
    TrafficMatrix m(8);
    for (int i = 0; i + 1 < 8; ++i) m.add_message(i, i + 1, 50.0);
    emit_heatmap(m, dir.path / "band.pgm", dir.path / "band.csv");
    const std::string px = pixels(dir.path / "band.pgm", 8);
    CHECK(static_cast<unsigned char>(px[1]) == 0);        // (0,1)
    CHECK(static_cast<unsigned char>(px[7]) == 255);      // (0,7)
    CHECK(static_cast<unsigned char>(px[0]) == 255);      // diagonal

    // sidecar carries the raw values
    const Matrix raw = load_matrix_csv(dir.path / "band.csv");
    CHECK(raw == m.vol());
  }
}
