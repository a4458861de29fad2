#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "relnet/drawing.hpp"
#include "relnet/graph.hpp"
#include "relnet/network.hpp"
#include "relnet/types.hpp"

namespace relnet {

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream ifs(path, std::ios::binary);
  if (!ifs) throw io_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << ifs.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream ofs(path, std::ios::binary);
  if (!ofs) throw io_error("cannot open " + path.string() + " for writing");
  ofs << body;
  ofs.flush();
  if (!ofs) throw io_error("write failed for " + path.string());
}

/// Comma-separated doubles, one record per line; skips blank lines and an
/// optional non-numeric header.
inline std::vector<std::vector<double>> read_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size() && cell[used] != '\r') throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (lineno == 1) continue;  // header
      throw io_error("malformed CSV at " + path.string() + ":" +
                     std::to_string(lineno));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Graph JSON
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json network_to_json(const MeasurementNetwork& net) {
  nlohmann::ordered_json j;
  j["k"] = net.k;
  j["nodes"] = net.graph.num_nodes();
  j["edges"] = nlohmann::ordered_json::array();
  for (std::uint32_t e = 0; e < net.graph.num_edges(); ++e) {
    const Edge& ed = net.graph.edge(e);
    nlohmann::ordered_json je;
    je["tail"] = ed.tail;
    je["head"] = ed.head;
    auto cov = nlohmann::ordered_json::array();
    for (int i = 0; i < net.k; ++i) {
      auto row = nlohmann::ordered_json::array();
      for (int jj = 0; jj < net.k; ++jj) row.push_back(net.covariance[e](i, jj));
      cov.push_back(row);
    }
    je["cov"] = cov;
    j["edges"].push_back(je);
  }
  return j;
}

inline MeasurementNetwork network_from_json(const nlohmann::json& j,
                                            NodeId reference = 0) {
  if (!j.contains("k") || !j.contains("nodes") || !j.contains("edges"))
    throw precondition_error("graph JSON needs keys k, nodes, edges");
  MeasurementNetwork net;
  net.k = j.at("k").get<int>();
  if (net.k < 1) throw precondition_error("graph JSON: k must be >= 1");
  std::size_t n = j.at("nodes").get<std::size_t>();
  GraphBuilder b(n);
  for (const auto& je : j.at("edges")) {
    if (!je.contains("tail") || !je.contains("head") || !je.contains("cov"))
      throw precondition_error("graph JSON edge needs tail, head, cov");
    b.add_edge(je.at("tail").get<NodeId>(), je.at("head").get<NodeId>());
    const auto& cov = je.at("cov");
    if (cov.size() != static_cast<std::size_t>(net.k))
      throw precondition_error("graph JSON: cov must be k x k");
    Block blk(net.k, net.k);
    for (int i = 0; i < net.k; ++i) {
      if (cov[i].size() != static_cast<std::size_t>(net.k))
        throw precondition_error("graph JSON: cov must be k x k");
      for (int jj = 0; jj < net.k; ++jj) blk(i, jj) = cov[i][jj].get<double>();
    }
    net.covariance.push_back(std::move(blk));
  }
  net.graph = b.build();
  net.reference = reference;
  return net;
}

inline void save_network_json(const MeasurementNetwork& net,
                              const std::filesystem::path& path) {
  detail::write_text(path, network_to_json(net).dump(2) + "\n");
}

inline MeasurementNetwork load_network_json(const std::filesystem::path& path,
                                            NodeId reference = 0) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw io_error("cannot parse " + path.string() + ": " + e.what());
  }
  return network_from_json(j, reference);
}

// ---------------------------------------------------------------------------
// Edge-list CSV (bulk alternative to JSON)
// ---------------------------------------------------------------------------

/// tail, head, then k^2 covariance entries row-major per line.
inline void save_edges_csv(const MeasurementNetwork& net,
                           const std::filesystem::path& path) {
  std::string body = "tail,head";
  for (int i = 0; i < net.k; ++i)
    for (int jj = 0; jj < net.k; ++jj)
      body += ",cov_" + std::to_string(i) + "_" + std::to_string(jj);
  body += "\n";
  for (std::uint32_t e = 0; e < net.graph.num_edges(); ++e) {
    const Edge& ed = net.graph.edge(e);
    body += std::to_string(ed.tail) + "," + std::to_string(ed.head);
    for (int i = 0; i < net.k; ++i)
      for (int jj = 0; jj < net.k; ++jj)
        body += "," + detail::fmt17(net.covariance[e](i, jj));
    body += "\n";
  }
  detail::write_text(path, body);
}

inline MeasurementNetwork load_edges_csv(const std::filesystem::path& path,
                                         NodeId reference = 0) {
  auto rows = detail::read_csv(path);
  if (rows.empty()) throw io_error("empty edge CSV at " + path.string());
  int k = static_cast<int>(std::lround(std::sqrt(double(rows.front().size() - 2))));
  if (rows.front().size() < 3 ||
      static_cast<std::size_t>(k) * k + 2 != rows.front().size())
    throw io_error("edge CSV at " + path.string() +
                   " must have tail, head and k^2 covariance columns");
  MeasurementNetwork net;
  net.k = k;
  net.reference = reference;
  std::size_t n = 0;
  for (const auto& row : rows)
    n = std::max({n, static_cast<std::size_t>(row[0]) + 1,
                  static_cast<std::size_t>(row[1]) + 1});
  GraphBuilder b(n);
  for (const auto& row : rows) {
    if (row.size() != rows.front().size())
      throw io_error("ragged edge CSV at " + path.string());
    b.add_edge(static_cast<NodeId>(row[0]), static_cast<NodeId>(row[1]));
    Block blk(k, k);
    for (int i = 0; i < k; ++i)
      for (int jj = 0; jj < k; ++jj) blk(i, jj) = row[2 + i * k + jj];
    net.covariance.push_back(std::move(blk));
  }
  net.graph = b.build();
  return net;
}

// ---------------------------------------------------------------------------
// Drawing CSV
// ---------------------------------------------------------------------------

/// node id, then d coordinates per line.
inline void save_drawing_csv(const Drawing& drawing,
                             const std::filesystem::path& path) {
  std::string body = "node";
  for (int i = 0; i < drawing.dim; ++i) body += ",x" + std::to_string(i);
  body += "\n";
  for (Eigen::Index u = 0; u < drawing.coords.rows(); ++u) {
    body += std::to_string(u);
    for (int i = 0; i < drawing.dim; ++i)
      body += "," + detail::fmt17(drawing.coords(u, i));
    body += "\n";
  }
  detail::write_text(path, body);
}

inline Drawing load_drawing_csv(const std::filesystem::path& path) {
  auto rows = detail::read_csv(path);
  if (rows.empty()) throw io_error("empty drawing CSV at " + path.string());
  int dim = static_cast<int>(rows.front().size()) - 1;
  if (dim < 1) throw io_error("drawing CSV at " + path.string() + " needs coordinates");
  Drawing out;
  out.dim = dim;
  out.coords.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (const auto& row : rows) {
    if (row.size() != rows.front().size())
      throw io_error("ragged drawing CSV at " + path.string());
    auto u = static_cast<Eigen::Index>(row[0]);
    if (u < 0 || u >= out.coords.rows())
      throw io_error("drawing CSV at " + path.string() + ": node id out of range");
    for (int i = 0; i < dim; ++i) out.coords(u, i) = row[1 + i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Measurements CSV
// ---------------------------------------------------------------------------

/// tail, head, then the k measured values per line, one line per edge.
inline void save_measurements_csv(const Graph& g,
                                  const std::vector<Eigen::VectorXd>& zeta,
                                  const std::filesystem::path& path) {
  if (zeta.size() != g.num_edges())
    throw precondition_error("save_measurements_csv: one measurement per edge");
  const int k = zeta.empty() ? 0 : static_cast<int>(zeta.front().size());
  std::string body = "tail,head";
  for (int i = 0; i < k; ++i) body += ",z" + std::to_string(i);
  body += "\n";
  for (std::uint32_t e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    body += std::to_string(ed.tail) + "," + std::to_string(ed.head);
    for (int i = 0; i < k; ++i) body += "," + detail::fmt17(zeta[e][i]);
    body += "\n";
  }
  detail::write_text(path, body);
}

/// Loads measurements and aligns them with the graph's edges by endpoint
/// pair; a measurement recorded against (head, tail) is negated.
inline std::vector<Eigen::VectorXd> load_measurements_csv(
    const Graph& g, int k, const std::filesystem::path& path) {
  auto rows = detail::read_csv(path);
  std::vector<Eigen::VectorXd> out(g.num_edges());
  std::vector<char> seen(g.num_edges(), 0);
  for (const auto& row : rows) {
    if (row.size() != static_cast<std::size_t>(k) + 2)
      throw io_error("measurements CSV at " + path.string() +
                     " must have tail, head and k values");
    auto tail = static_cast<NodeId>(row[0]);
    auto head = static_cast<NodeId>(row[1]);
    if (tail >= g.num_nodes() || head >= g.num_nodes())
      throw io_error("measurements CSV at " + path.string() + ": node out of range");
    auto e = g.find_edge(tail, head);
    if (!e)
      throw io_error("measurements CSV at " + path.string() + ": no edge " +
                     std::to_string(tail) + " -> " + std::to_string(head));
    double sign = g.edge(*e).tail == tail ? 1.0 : -1.0;
    Eigen::VectorXd z(k);
    for (int i = 0; i < k; ++i) z[i] = sign * row[2 + i];
    out[*e] = std::move(z);
    seen[*e] = 1;
  }
  for (std::uint32_t e = 0; e < g.num_edges(); ++e)
    if (!seen[e])
      throw io_error("measurements CSV at " + path.string() +
                     " is missing edge index " + std::to_string(e));
  return out;
}

// ---------------------------------------------------------------------------
// Covariance / resistance / pair CSVs
// ---------------------------------------------------------------------------

/// target id, k, then k^2 block entries row-major per line.
inline void save_covariance_csv(const std::vector<NodeId>& targets,
                                const std::vector<Block>& blocks,
                                const std::filesystem::path& path) {
  if (targets.size() != blocks.size())
    throw precondition_error("save_covariance_csv: one block per target");
  std::string body = "target,k,entries\n";
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Block& blk = blocks[i];
    body += std::to_string(targets[i]) + "," + std::to_string(blk.rows());
    for (Eigen::Index r = 0; r < blk.rows(); ++r)
      for (Eigen::Index c = 0; c < blk.cols(); ++c)
        body += "," + detail::fmt17(blk(r, c));
    body += "\n";
  }
  detail::write_text(path, body);
}

/// u, v, k, then k^2 block entries row-major per line.
inline void save_resistance_csv(const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                const std::vector<Block>& blocks,
                                const std::filesystem::path& path) {
  if (pairs.size() != blocks.size())
    throw precondition_error("save_resistance_csv: one block per pair");
  std::string body = "u,v,k,entries\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Block& blk = blocks[i];
    body += std::to_string(pairs[i].first) + "," + std::to_string(pairs[i].second) +
            "," + std::to_string(blk.rows());
    for (Eigen::Index r = 0; r < blk.rows(); ++r)
      for (Eigen::Index c = 0; c < blk.cols(); ++c)
        body += "," + detail::fmt17(blk(r, c));
    body += "\n";
  }
  detail::write_text(path, body);
}

inline void save_pairs_csv(const std::vector<std::pair<NodeId, NodeId>>& pairs,
                           const std::filesystem::path& path) {
  std::string body = "u,v\n";
  for (const auto& [u, v] : pairs)
    body += std::to_string(u) + "," + std::to_string(v) + "\n";
  detail::write_text(path, body);
}

inline std::vector<std::pair<NodeId, NodeId>> load_pairs_csv(
    const std::filesystem::path& path) {
  auto rows = detail::read_csv(path);
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const auto& row : rows) {
    if (row.size() != 2) throw io_error("pairs CSV at " + path.string() +
                                        " must have two columns");
    out.push_back({static_cast<NodeId>(row[0]), static_cast<NodeId>(row[1])});
  }
  return out;
}

/// node, then k values per line (ground truth or estimates).
inline void save_values_csv(const Eigen::MatrixXd& values,
                            const std::filesystem::path& path) {
  std::string body = "node";
  for (Eigen::Index i = 0; i < values.cols(); ++i) body += ",v" + std::to_string(i);
  body += "\n";
  for (Eigen::Index u = 0; u < values.rows(); ++u) {
    body += std::to_string(u);
    for (Eigen::Index i = 0; i < values.cols(); ++i)
      body += "," + detail::fmt17(values(u, i));
    body += "\n";
  }
  detail::write_text(path, body);
}

inline Eigen::MatrixXd load_values_csv(const std::filesystem::path& path) {
  auto rows = detail::read_csv(path);
  if (rows.empty()) throw io_error("empty values CSV at " + path.string());
  Eigen::Index cols = static_cast<Eigen::Index>(rows.front().size()) - 1;
  if (cols < 1) throw io_error("values CSV at " + path.string() + " needs values");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), cols);
  for (const auto& row : rows) {
    if (row.size() != rows.front().size())
      throw io_error("ragged values CSV at " + path.string());
    auto u = static_cast<Eigen::Index>(row[0]);
    if (u < 0 || u >= out.rows())
      throw io_error("values CSV at " + path.string() + ": node id out of range");
    for (Eigen::Index i = 0; i < cols; ++i) out(u, i) = row[1 + i];
  }
  return out;
}

}  // namespace relnet
