// Copyright 2026 The dpdg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// File formats.
//
//   edges.csv   header "src,dst", one directed edge per row
//   attrs.csv   header "id,<attr>,...", one row per node
//   schema.json {"attributes": [{"name": ..., "kind": "categorical" |
//               "continuous", "rule": "match_sign" | "abs_distance"}, ...]}
//
// Node ids are opaque strings. When an attribute table is present its row
// order fixes the node order; otherwise ids are ordered numerically when all
// of them are integers and lexicographically otherwise.

#ifndef DPDG_IO_H_
#define DPDG_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpdg/dp_release.h"
#include "dpdg/graph_model.h"
#include "dpdg/inference.h"
#include "dpdg/sim_harness.h"
#include "dpdg/solver.h"

namespace dpdg {

enum class AttributeKind { kCategorical, kContinuous };
enum class CovariateRule { kMatchSign, kAbsDistance };

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::kCategorical;
  CovariateRule rule = CovariateRule::kMatchSign;
};

struct AttributeSchema {
  std::vector<AttributeSpec> attributes;

  // Throws SchemaError on unknown kinds/rules, duplicate names or a rule that
  // does not fit its kind.
  static AttributeSchema FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
  void Validate() const;
};

AttributeSchema LoadSchema(const std::filesystem::path& path);

class NodeAttributeTable {
 public:
  NodeAttributeTable() = default;
  NodeAttributeTable(std::vector<std::string> columns,
                     std::vector<std::string> ids,
                     std::vector<std::vector<std::string>> rows);

  int n() const { return static_cast<int>(ids_.size()); }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& cell(int node, int column) const {
    return rows_[node][column];
  }
  // Column index by name; throws SchemaError if absent.
  int Column(const std::string& name) const;
  NodeAttributeTable Induced(const std::vector<int>& keep) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> ids_;
  std::vector<std::vector<std::string>> rows_;
};

// Throws ParseError (with line number) on a malformed row and
// ValidationError on duplicate ids.
NodeAttributeTable LoadAttributes(const std::filesystem::path& path);

struct LoadedGraph {
  DirectedGraph graph;
  std::vector<std::string> ids;
  std::vector<std::string> warnings;
};

// With `node_ids`, every edge endpoint must be one of them (ValidationError
// otherwise) and nodes follow that order. Duplicate edges are collapsed and
// reported in `warnings`; self-loops throw ValidationError; malformed rows
// throw ParseError.
LoadedGraph LoadGraph(const std::filesystem::path& path,
                      const std::vector<std::string>* node_ids = nullptr);
LoadedGraph ParseEdgeList(std::istream& in,
                          const std::vector<std::string>* node_ids = nullptr);

struct Preprocessed {
  DirectedGraph graph;
  NodeAttributeTable attrs;
  std::vector<std::string> ids;
  // id_map[new] = old 0-based index.
  std::vector<int> id_map;
  std::vector<std::string> removed;  // ids in removal order
};

// Repeatedly drops nodes with zero out-degree or zero in-degree. Throws
// ValidationError if nothing is left.
Preprocessed DropIsolates(const DirectedGraph& g,
                          const std::vector<std::string>& ids,
                          const NodeAttributeTable& attrs);

// Throws SchemaError if an attribute is missing, a rule does not fit its
// kind, or a continuous cell is not a number.
CovariateSet BuildCovariates(const NodeAttributeTable& attrs,
                             const AttributeSchema& schema);

nlohmann::json GraphToJson(const DirectedGraph& g,
                           const std::vector<std::string>& ids);
LoadedGraph GraphFromJson(const nlohmann::json& j);

// Infinite epsilon is written as the string "infinity".
nlohmann::json NoisyDegreesToJson(const NoisyDegrees& d, double epsilon,
                                  std::uint64_t seed);
struct NoisyRelease {
  NoisyDegrees degrees;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};
NoisyRelease NoisyDegreesFromJson(const nlohmann::json& j);

// Scenario config: {"n", "L", "epsilon", "gamma", "reps", "seed", "pairs"}.
// Missing keys keep the Scenario defaults. Throws SchemaError on unknown keys
// or wrong types.
Scenario ScenarioFromJson(const nlohmann::json& j);
nlohmann::json ScenarioToJson(const Scenario& s);

// min, quartiles and max with the (n-1)p interpolation rule.
struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};
FiveNumber Summarize(std::vector<long> values);

// Converts the whitespace separated ELwork (adjacency) and ELattr files of the
// Lazega lawyers data into edges.csv, attrs.csv and schema.json under `out`.
// Ids are the 1-based row numbers. Throws ParseError on malformed input.
void ConvertLazega(const std::filesystem::path& work,
                   const std::filesystem::path& attr,
                   const std::filesystem::path& out);
AttributeSchema LazegaSchema();

}  // namespace dpdg

#endif  // DPDG_IO_H_
