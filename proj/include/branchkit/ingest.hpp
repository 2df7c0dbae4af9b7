#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "branchkit/graph.hpp"

namespace branchkit {

struct LabeledRecord {
  std::string a;
  std::string b;
  std::optional<double> weight;
};

struct LabeledEdgeList {
  std::vector<LabeledRecord> records;  // deduplicated, pair order normalized
  std::string source_name;
  std::size_t self_loops_dropped = 0;
};

class ingest_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses a tab- or comma-separated edge list: label_a, label_b[, weight].
// Lines starting with '#' and blank lines are skipped. Labels are trimmed of
// surrounding whitespace; self-loops are dropped and counted; duplicate pairs
// collapse to one record. With a threshold, only records whose weight exceeds
// it survive (records without a weight column are then dropped too).
LabeledEdgeList read_edge_list(const std::filesystem::path& path,
                               std::optional<double> weight_threshold = std::nullopt);

struct AlignedReplicates {
  ReplicateSet reps;
  std::vector<std::string> labels;  // lexicographic; index = vertex id
};

// Restricts every list to the labels common to all of them and builds one
// graph per list on the shared vertex set.
AlignedReplicates align_replicates(const std::vector<LabeledEdgeList>& lists);

enum class VertexRule { union_labels, intersection_labels };

struct ConsensusGraph {
  Graph graph;
  std::vector<std::string> labels;
};

// Edge kept iff it appears in at least min_occurrences of the lists.
ConsensusGraph consensus_true_network(const std::vector<LabeledEdgeList>& lists,
                                      std::size_t min_occurrences,
                                      VertexRule rule = VertexRule::union_labels);

// Canonical on-disk form: "i<TAB>j" per line, edges sorted (min,max)
// lexicographically, plus a "<path>.meta.json" sidecar {n, label_map}.
void write_canonical(const std::filesystem::path& path, const Graph& g,
                     const std::vector<std::string>& labels = {});

struct CanonicalGraph {
  Graph graph;
  std::vector<std::string> labels;
};

// Reads the canonical form. The sidecar supplies n (and labels); without it,
// n is inferred as max index + 1.
CanonicalGraph read_canonical(const std::filesystem::path& path);

}  // namespace branchkit
