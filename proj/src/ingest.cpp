#include "branchkit/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace branchkit {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) fields.push_back(trim(field));
  return fields;
}

std::pair<std::string, std::string> ordered(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

std::map<std::string, VertexId> index_labels(const std::set<std::string>& labels) {
  std::map<std::string, VertexId> out;
  VertexId next = 0;
  for (const auto& l : labels) out.emplace(l, next++);
  return out;
}

}  // namespace

LabeledEdgeList read_edge_list(const std::filesystem::path& path,
                               std::optional<double> weight_threshold) {
  std::ifstream in(path);
  if (!in) throw ingest_error("cannot open " + path.string());
  LabeledEdgeList out;
  out.source_name = path.filename().string();
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto fields = split_fields(stripped);
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty())
      throw ingest_error("parse error at " + path.string() + ":" + std::to_string(lineno) +
                         ": expected two labels");
    std::optional<double> weight;
    if (fields.size() >= 3 && !fields[2].empty()) {
      try {
        std::size_t pos = 0;
        weight = std::stod(fields[2], &pos);
        if (pos != fields[2].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ingest_error("parse error at " + path.string() + ":" + std::to_string(lineno) +
                           ": bad weight '" + fields[2] + "'");
      }
      if (*weight < 0)
        throw ingest_error("parse error at " + path.string() + ":" + std::to_string(lineno) +
                           ": negative weight");
    }
    if (fields[0] == fields[1]) {
      ++out.self_loops_dropped;
      continue;
    }
    if (weight_threshold && !(weight && *weight > *weight_threshold)) continue;
    auto key = ordered(fields[0], fields[1]);
    if (!seen.insert(key).second) continue;
    out.records.push_back({key.first, key.second, weight});
  }
  return out;
}

AlignedReplicates align_replicates(const std::vector<LabeledEdgeList>& lists) {
  if (lists.size() < 3) throw ingest_error("align_replicates: at least three lists required");
  std::set<std::string> common;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    std::set<std::string> labels;
    for (const auto& r : lists[i].records) {
      labels.insert(r.a);
      labels.insert(r.b);
    }
    if (i == 0) {
      common = std::move(labels);
    } else {
      std::set<std::string> kept;
      std::set_intersection(common.begin(), common.end(), labels.begin(), labels.end(),
                            std::inserter(kept, kept.begin()));
      common = std::move(kept);
    }
  }
  if (common.empty()) throw ingest_error("align_replicates: no labels common to all lists");
  const auto index = index_labels(common);

  AlignedReplicates out;
  out.labels.assign(common.begin(), common.end());
  out.reps.n = common.size();
  for (const auto& list : lists) {
    EdgeList edges;
    for (const auto& r : list.records) {
      const auto ia = index.find(r.a);
      const auto ib = index.find(r.b);
      if (ia != index.end() && ib != index.end())
        edges.emplace_back(ia->second, ib->second);
    }
    out.reps.graphs.emplace_back(out.reps.n, std::move(edges));
  }
  return out;
}

ConsensusGraph consensus_true_network(const std::vector<LabeledEdgeList>& lists,
                                      std::size_t min_occurrences, VertexRule rule) {
  if (lists.size() < 2) throw ingest_error("consensus_true_network: at least two lists required");
  if (min_occurrences < 1) throw ingest_error("consensus_true_network: min_occurrences >= 1");

  std::set<std::string> vertex_labels;
  bool first = true;
  for (const auto& list : lists) {
    std::set<std::string> labels;
    for (const auto& r : list.records) {
      labels.insert(r.a);
      labels.insert(r.b);
    }
    if (rule == VertexRule::union_labels) {
      vertex_labels.insert(labels.begin(), labels.end());
    } else if (first) {
      vertex_labels = std::move(labels);
    } else {
      std::set<std::string> kept;
      std::set_intersection(vertex_labels.begin(), vertex_labels.end(), labels.begin(),
                            labels.end(), std::inserter(kept, kept.begin()));
      vertex_labels = std::move(kept);
    }
    first = false;
  }
  const auto index = index_labels(vertex_labels);

  std::map<std::pair<std::string, std::string>, std::size_t> occurrences;
  for (const auto& list : lists)
    for (const auto& r : list.records) ++occurrences[{r.a, r.b}];

  EdgeList edges;
  for (const auto& [pair, count] : occurrences) {
    if (count < min_occurrences) continue;
    const auto ia = index.find(pair.first);
    const auto ib = index.find(pair.second);
    if (ia != index.end() && ib != index.end()) edges.emplace_back(ia->second, ib->second);
  }
  ConsensusGraph out;
  out.labels.assign(vertex_labels.begin(), vertex_labels.end());
  out.graph = Graph(vertex_labels.size(), std::move(edges));
  return out;
}

void write_canonical(const std::filesystem::path& path, const Graph& g,
                     const std::vector<std::string>& labels) {
  std::ofstream out(path);
  if (!out) throw ingest_error("cannot write " + path.string());
  for (const auto& [u, v] : g.edges()) out << u << '\t' << v << '\n';
  out.close();

  nlohmann::json meta;
  meta["n"] = g.num_vertices();
  nlohmann::json label_map = nlohmann::json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) label_map[labels[i]] = i;
  meta["label_map"] = label_map;
  std::ofstream side(path.string() + ".meta.json");
  if (!side) throw ingest_error("cannot write " + path.string() + ".meta.json");
  side << meta.dump(2) << '\n';
}

CanonicalGraph read_canonical(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ingest_error("cannot open " + path.string());
  EdgeList edges;
  std::string line;
  std::size_t lineno = 0;
  VertexId max_id = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    std::uint64_t u = 0, v = 0;
    std::stringstream ss(stripped);
    if (!(ss >> u >> v))
      throw ingest_error("parse error at " + path.string() + ":" + std::to_string(lineno));
    edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
    max_id = std::max({max_id, static_cast<VertexId>(u), static_cast<VertexId>(v)});
  }

  CanonicalGraph out;
  std::size_t n = edges.empty() ? 0 : static_cast<std::size_t>(max_id) + 1;
  const std::filesystem::path side = path.string() + ".meta.json";
  if (std::filesystem::exists(side)) {
    std::ifstream meta_in(side);
    nlohmann::json meta = nlohmann::json::parse(meta_in);
    n = meta.at("n").get<std::size_t>();
    if (meta.contains("label_map")) {
      out.labels.resize(meta["label_map"].size());
      for (const auto& [label, idx] : meta["label_map"].items())
        out.labels[idx.get<std::size_t>()] = label;
    }
  }
  out.graph = Graph(n, std::move(edges));
  return out;
}

}  // namespace branchkit
