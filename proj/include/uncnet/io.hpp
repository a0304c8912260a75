#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "uncnet/network.hpp"
#include "uncnet/recovery.hpp"

namespace uncnet {

// Edge probability file:
//   # nodes=<n>
//   i<TAB>j<TAB>q          (0 < q <= 1, i < j)
// Blank lines and '#' comments are ignored. Probabilities serialize with 17
// significant digits so parse(serialize(x)) == x.
UncertainNetwork read_edgeprob_file(const std::string& path);
UncertainNetwork parse_edgeprob(std::istream& in);
void write_edgeprob_file(const std::string& path, const UncertainNetwork& net);
std::string serialize_edgeprob(const UncertainNetwork& net);

// Partition file:
//   # k=<k>
//   node<TAB>group
Partition read_partition_file(const std::string& path);
void write_partition_file(const std::string& path, const Partition& part);

// Edge list file (truth edges):
//   # nodes=<n>
//   i<TAB>j
std::vector<std::pair<std::uint32_t, std::uint32_t>> read_edge_file(const std::string& path,
                                                                    std::size_t* n_out = nullptr);
void write_edge_file(const std::string& path,
                     const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                     std::size_t n);

// Scored pair list:
//   # nodes=<n>
//   # method=<tag>
//   i<TAB>j<TAB>score      (0 <= score <= 1)
EdgeScoreList read_scores_file(const std::string& path, std::size_t* n_out = nullptr);
void write_scores_file(const std::string& path, const EdgeScoreList& scores, std::size_t n);

// Optional node label map: id<TAB>name, one per line.
std::vector<std::string> read_label_map(const std::string& path, std::size_t n);

// Two-column CSV of ROC curve points with a header row.
void write_roc_csv(const std::string& path, const ROCCurve& curve);

} // namespace uncnet
