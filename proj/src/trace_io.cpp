#include "tofa/trace_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace tofa {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

TrafficMatrix ingest_trace(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);

  std::string line;
  int line_no = 0;

  // Header line.
  json header;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    try {
      header = json::parse(line);
    } catch (const json::exception& e) {
      throw TraceParseError(std::string("bad header: ") + e.what(), line_no);
    }
    break;
  }
  if (header.is_null() || !header.contains("n")) {
    throw TraceParseError("trace header with \"n\" is required", std::max(line_no, 1));
  }

  const int n = header.at("n").get<int>();
  if (n < 1) throw TraceParseError("world size must be >= 1", line_no);

  std::map<int, Communicator> comms;
  comms.emplace(0, Communicator::world(n));
  if (header.contains("communicators")) {
    for (const json& jc : header.at("communicators")) {
      Communicator c;
      c.id = jc.at("id").get<int>();
      c.ranks = jc.at("ranks").get<std::vector<int>>();
      if (c.id == 0) throw TraceParseError("communicator 0 is reserved for the world", line_no);
      if (c.ranks.empty()) throw TraceParseError("communicator has no ranks", line_no);
      std::vector<int> sorted = c.ranks;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
          sorted.front() < 0 || sorted.back() >= n) {
        throw TraceParseError("communicator ranks must be distinct world ranks", line_no);
      }
      if (!comms.emplace(c.id, std::move(c)).second) {
        throw TraceParseError("duplicate communicator id", line_no);
      }
    }
  }

  TrafficMatrix m(n);
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json je;
    try {
      je = json::parse(line);
    } catch (const json::exception& e) {
      throw TraceParseError(std::string("bad event: ") + e.what(), line_no);
    }
    try {
      TraceEvent ev;
      ev.kind = event_kind_from_string(je.at("kind").get<std::string>());
      ev.comm = je.value("comm", 0);
      ev.bytes = je.value("bytes", 0.0);
      const auto it = comms.find(ev.comm);
      if (it == comms.end()) {
        throw std::invalid_argument("undeclared communicator " + std::to_string(ev.comm));
      }
      const Communicator& comm = it->second;
      if (ev.kind == EventKind::send) {
        ev.src = je.at("src").get<int>();
        ev.dst = je.at("dst").get<int>();
        record_p2p(m, comm, ev.src, ev.dst, ev.bytes);
      } else {
        ev.src = je.value("root", 0);
        expand_collective(m, ev, comm);
      }
    } catch (const TraceParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw TraceParseError(e.what(), line_no);
    }
  }
  return m;
}

std::string format_number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", v);
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void save_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << m.rows() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_number(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing matrix: " + path.string());
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty matrix file: " + path.string());
  const int n = std::stoi(line);
  if (n < 1) throw std::runtime_error("bad matrix size in " + path.string());

  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("matrix file truncated: " + path.string());
    }
    std::istringstream ls(line);
    std::string cell;
    for (int j = 0; j < n; ++j) {
      if (!std::getline(ls, cell, ',')) {
        throw std::runtime_error("matrix row too short: " + path.string());
      }
      m(i, j) = std::stod(cell);
    }
  }
  return m;
}

void emit_heatmap(const TrafficMatrix& m, const std::filesystem::path& pgm_path,
                  const std::filesystem::path& csv_path) {
  const Matrix& vol = m.vol();
  const double max_vol = vol.maxCoeff();
  const int n = m.n();

  std::ofstream out = open_output(pgm_path, /*binary=*/true);
  out << "P5\n" << n << ' ' << n << "\n255\n";
  std::string row(static_cast<std::size_t>(n), '\0');
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double shade = max_vol > 0.0 ? vol(i, j) / max_vol : 0.0;
      row[static_cast<std::size_t>(j)] =
          static_cast<char>(255 - static_cast<int>(std::lround(255.0 * shade)));
    }
    out.write(row.data(), n);
  }
  if (!out) throw std::runtime_error("failed writing heatmap: " + pgm_path.string());

  save_matrix_csv(vol, csv_path);
}

}  // namespace tofa
