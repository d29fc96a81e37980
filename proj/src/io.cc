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

#include "dpdg/io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "dpdg/errors.h"

namespace dpdg {
namespace {

using nlohmann::json;

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(Trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::ifstream OpenOrThrow(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

bool ParseInteger(const std::string& s, long* out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, *out);
  return ec == std::errc() && ptr == end && !s.empty();
}

bool ParseDouble(const std::string& s, double* out) {
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    *out = std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size() && std::isfinite(*out);
}

// Numeric order when every id is an integer, lexicographic otherwise.
void SortIds(std::vector<std::string>& ids) {
  std::vector<long> values(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (!ParseInteger(ids[k], &values[k])) {
      std::sort(ids.begin(), ids.end());
      return;
    }
  }
  std::sort(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) {
    return std::stol(a) < std::stol(b);
  });
}

const char* KindName(AttributeKind k) {
  return k == AttributeKind::kCategorical ? "categorical" : "continuous";
}

const char* RuleName(CovariateRule r) {
  return r == CovariateRule::kMatchSign ? "match_sign" : "abs_distance";
}

template <typename T>
T Get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Schema

AttributeSchema AttributeSchema::FromJson(const json& j) {
  if (!j.is_object() || !j.contains("attributes") ||
      !j["attributes"].is_array()) {
    throw SchemaError("schema needs an \"attributes\" array");
  }
  AttributeSchema s;
  for (const auto& a : j["attributes"]) {
    AttributeSpec spec;
    spec.name = Get<std::string>(a, "name");
    const auto kind = Get<std::string>(a, "kind");
    if (kind == "categorical") {
      spec.kind = AttributeKind::kCategorical;
    } else if (kind == "continuous") {
      spec.kind = AttributeKind::kContinuous;
    } else {
      throw SchemaError("attribute '" + spec.name + "': unknown kind '" + kind + "'");
    }
    const auto rule = a.contains("rule")
                          ? Get<std::string>(a, "rule")
                          : std::string(spec.kind == AttributeKind::kCategorical
                                            ? "match_sign"
                                            : "abs_distance");
    if (rule == "match_sign") {
      spec.rule = CovariateRule::kMatchSign;
    } else if (rule == "abs_distance") {
      spec.rule = CovariateRule::kAbsDistance;
    } else {
      throw SchemaError("attribute '" + spec.name + "': unknown rule '" + rule + "'");
    }
    s.attributes.push_back(spec);
  }
  s.Validate();
  return s;
}

json AttributeSchema::ToJson() const {
  json arr = json::array();
  for (const auto& a : attributes) {
    arr.push_back({{"name", a.name}, {"kind", KindName(a.kind)},
                   {"rule", RuleName(a.rule)}});
  }
  return {{"attributes", arr}};
}

void AttributeSchema::Validate() const {
  if (attributes.empty()) throw SchemaError("schema declares no attributes");
  std::set<std::string> seen;
  for (const auto& a : attributes) {
    if (a.name.empty()) throw SchemaError("attribute with empty name");
    if (!seen.insert(a.name).second) {
      throw SchemaError("duplicate attribute '" + a.name + "'");
    }
    if (a.rule == CovariateRule::kAbsDistance &&
        a.kind == AttributeKind::kCategorical) {
      throw SchemaError("attribute '" + a.name +
                        "': abs_distance needs a continuous attribute");
    }
  }
}

AttributeSchema LoadSchema(const std::filesystem::path& path) {
  auto in = OpenOrThrow(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return AttributeSchema::FromJson(j);
}

// ---------------------------------------------------------------------------
// Attribute table

NodeAttributeTable::NodeAttributeTable(std::vector<std::string> columns,
                                       std::vector<std::string> ids,
                                       std::vector<std::vector<std::string>> rows)
    : columns_(std::move(columns)), ids_(std::move(ids)), rows_(std::move(rows)) {
  if (ids_.size() != rows_.size()) {
    throw DomainError("attribute table: ids and rows differ in length");
  }
  std::set<std::string> seen;
  for (std::size_t k = 0; k < ids_.size(); ++k) {
    if (rows_[k].size() != columns_.size()) {
      throw DomainError("attribute table: row " + ids_[k] + " has the wrong width");
    }
    if (!seen.insert(ids_[k]).second) {
      throw ValidationError("duplicate node id '" + ids_[k] + "' in attributes");
    }
  }
}

int NodeAttributeTable::Column(const std::string& name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) {
    throw SchemaError("attribute '" + name + "' missing from the table");
  }
  return static_cast<int>(it - columns_.begin());
}

NodeAttributeTable NodeAttributeTable::Induced(const std::vector<int>& keep) const {
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> rows;
  for (int k : keep) {
    ids.push_back(ids_.at(k));
    rows.push_back(rows_.at(k));
  }
  return NodeAttributeTable(columns_, std::move(ids), std::move(rows));
}

NodeAttributeTable LoadAttributes(const std::filesystem::path& path) {
  auto in = OpenOrThrow(path);
  std::string line;
  int lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (Trim(line).empty()) continue;
    header = SplitCsv(line);
    break;
  }
  if (header.empty() || header[0] != "id") {
    throw ParseError("attribute header must start with 'id'", lineno);
  }
  std::vector<std::string> columns(header.begin() + 1, header.end());
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (Trim(line).empty()) continue;
    auto cells = SplitCsv(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(cells.size()),
                       lineno);
    }
    if (cells[0].empty()) throw ParseError("empty node id", lineno);
    ids.push_back(cells[0]);
    rows.emplace_back(cells.begin() + 1, cells.end());
  }
  return NodeAttributeTable(std::move(columns), std::move(ids), std::move(rows));
}

// ---------------------------------------------------------------------------
// Edge lists

LoadedGraph ParseEdgeList(std::istream& in,
                          const std::vector<std::string>* node_ids) {
  std::string line;
  int lineno = 0;
  bool have_header = false;
  std::vector<std::pair<std::string, std::string>> raw;
  std::vector<int> raw_line;
  while (std::getline(in, line)) {
    ++lineno;
    if (Trim(line).empty()) continue;
    const auto cells = SplitCsv(line);
    if (!have_header) {
      if (cells.size() != 2 || cells[0] != "src" || cells[1] != "dst") {
        throw ParseError("edge list header must be 'src,dst'", lineno);
      }
      have_header = true;
      continue;
    }
    if (cells.size() != 2 || cells[0].empty() || cells[1].empty()) {
      throw ParseError("expected 'src,dst'", lineno);
    }
    raw.emplace_back(cells[0], cells[1]);
    raw_line.push_back(lineno);
  }
  if (!have_header) throw ParseError("empty edge list");

  std::vector<std::string> ids;
  if (node_ids) {
    ids = *node_ids;
  } else {
    std::set<std::string> seen;
    for (const auto& [s, d] : raw) {
      seen.insert(s);
      seen.insert(d);
    }
    ids.assign(seen.begin(), seen.end());
    SortIds(ids);
  }
  std::unordered_map<std::string, int> index;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    index.emplace(ids[k], static_cast<int>(k));
  }

  std::vector<std::pair<int, int>> edges;
  std::set<std::pair<int, int>> seen_edges;
  std::vector<std::string> warnings;
  for (std::size_t e = 0; e < raw.size(); ++e) {
    const auto& [s, d] = raw[e];
    if (s == d) {
      throw ValidationError("line " + std::to_string(raw_line[e]) +
                            ": self-loop at node '" + s + "'");
    }
    const auto si = index.find(s);
    const auto di = index.find(d);
    if (si == index.end() || di == index.end()) {
      throw ValidationError("line " + std::to_string(raw_line[e]) + ": node '" +
                            (si == index.end() ? s : d) +
                            "' has no attribute row");
    }
    const std::pair<int, int> edge{si->second, di->second};
    if (!seen_edges.insert(edge).second) {
      warnings.push_back("line " + std::to_string(raw_line[e]) +
                         ": duplicate edge " + s + " -> " + d + " collapsed");
      continue;
    }
    edges.push_back(edge);
  }
  DirectedGraph g(static_cast<int>(ids.size()), edges);
  return {std::move(g), std::move(ids), std::move(warnings)};
}

LoadedGraph LoadGraph(const std::filesystem::path& path,
                      const std::vector<std::string>* node_ids) {
  auto in = OpenOrThrow(path);
  return ParseEdgeList(in, node_ids);
}

// ---------------------------------------------------------------------------
// Preprocessing and covariates

Preprocessed DropIsolates(const DirectedGraph& g,
                          const std::vector<std::string>& ids,
                          const NodeAttributeTable& attrs) {
  const int n = g.n();
  if (static_cast<int>(ids.size()) != n) {
    throw DomainError("graph and id list disagree on n");
  }
  if (attrs.n() != 0 && attrs.n() != n) {
    throw DomainError("graph and attribute table disagree on n");
  }
  std::vector<bool> alive(n, true);
  std::vector<std::string> removed;
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<long> out(n, 0), in(n, 0);
    for (int i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (int j = 0; j < n; ++j) {
        if (alive[j] && g.edge(i, j)) {
          ++out[i];
          ++in[j];
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      if (alive[i] && (out[i] == 0 || in[i] == 0)) {
        alive[i] = false;
        removed.push_back(ids[i]);
        changed = true;
      }
    }
  }
  std::vector<int> keep;
  for (int i = 0; i < n; ++i) {
    if (alive[i]) keep.push_back(i);
  }
  if (keep.size() < 2) {
    throw ValidationError("removing nodes without out- or in-edges leaves " +
                          std::to_string(keep.size()) + " nodes");
  }
  Preprocessed out{g.Induced(keep), attrs.n() ? attrs.Induced(keep) : attrs,
                   {}, keep, std::move(removed)};
  for (int k : keep) out.ids.push_back(ids[k]);
  return out;
}

CovariateSet BuildCovariates(const NodeAttributeTable& attrs,
                             const AttributeSchema& schema) {
  schema.Validate();
  const int n = attrs.n();
  const int p = static_cast<int>(schema.attributes.size());
  // Per attribute: numeric value for continuous, category code otherwise.
  std::vector<std::vector<double>> value(p, std::vector<double>(n));
  for (int k = 0; k < p; ++k) {
    const auto& spec = schema.attributes[k];
    const int col = attrs.Column(spec.name);
    std::map<std::string, int> codes;
    for (int i = 0; i < n; ++i) {
      const std::string& cell = attrs.cell(i, col);
      if (spec.kind == AttributeKind::kContinuous) {
        if (!ParseDouble(cell, &value[k][i])) {
          throw SchemaError("attribute '" + spec.name + "' of node '" +
                            attrs.ids()[i] + "' is not a number: '" + cell + "'");
        }
      } else {
        if (cell.empty()) {
          throw SchemaError("attribute '" + spec.name + "' of node '" +
                            attrs.ids()[i] + "' is empty");
        }
        value[k][i] = codes.emplace(cell, static_cast<int>(codes.size())).first->second;
      }
    }
  }
  return CovariateSet(n, p, [&](int i, int j) {
    std::vector<double> z(p);
    for (int k = 0; k < p; ++k) {
      const double a = value[k][i];
      const double b = value[k][j];
      z[k] = schema.attributes[k].rule == CovariateRule::kMatchSign
                 ? (a == b ? 1.0 : -1.0)
                 : std::abs(a - b);
    }
    return z;
  });
}

// ---------------------------------------------------------------------------
// JSON

json GraphToJson(const DirectedGraph& g, const std::vector<std::string>& ids) {
  if (static_cast<int>(ids.size()) != g.n()) {
    throw DomainError("graph and id list disagree on n");
  }
  json edges = json::array();
  for (const auto& [i, j] : g.Edges()) edges.push_back({i, j});
  return {{"n", g.n()}, {"ids", ids}, {"edges", edges}};
}

LoadedGraph GraphFromJson(const json& j) {
  const int n = Get<int>(j, "n");
  auto ids = Get<std::vector<std::string>>(j, "ids");
  if (static_cast<int>(ids.size()) != n) {
    throw SchemaError("graph JSON: ids has the wrong length");
  }
  const auto edges = Get<std::vector<std::pair<int, int>>>(j, "edges");
  return {DirectedGraph(n, edges), std::move(ids), {}};
}

json NoisyDegreesToJson(const NoisyDegrees& d, double epsilon,
                        std::uint64_t seed) {
  json eps = std::isinf(epsilon) ? json("infinity") : json(epsilon);
  return {{"epsilon", eps}, {"d_tilde", d.d_tilde}, {"b_tilde", d.b_tilde},
          {"seed", seed}};
}

NoisyRelease NoisyDegreesFromJson(const json& j) {
  NoisyRelease r;
  if (!j.contains("epsilon")) throw SchemaError("release JSON lacks 'epsilon'");
  const json& eps = j["epsilon"];
  if (eps.is_string() && eps.get<std::string>() == "infinity") {
    r.epsilon = std::numeric_limits<double>::infinity();
  } else if (eps.is_number()) {
    r.epsilon = eps.get<double>();
  } else {
    throw SchemaError("release JSON: 'epsilon' must be a number or \"infinity\"");
  }
  r.degrees.d_tilde = Get<IntVector>(j, "d_tilde");
  r.degrees.b_tilde = Get<IntVector>(j, "b_tilde");
  r.seed = Get<std::uint64_t>(j, "seed");
  if (r.degrees.d_tilde.size() != r.degrees.b_tilde.size()) {
    throw SchemaError("release JSON: d_tilde and b_tilde differ in length");
  }
  return r;
}

Scenario ScenarioFromJson(const json& j) {
  if (!j.is_object()) throw SchemaError("scenario config must be an object");
  static const std::set<std::string> known{"n",    "L",    "epsilon", "gamma",
                                           "reps", "seed", "pairs"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw SchemaError("unknown config key '" + key + "'");
  }
  Scenario s;
  if (j.contains("n")) s.n = Get<int>(j, "n");
  try {
    if (j.contains("L")) s.l_kind = ParseLKind(Get<std::string>(j, "L"));
    if (j.contains("epsilon")) {
      s.epsilon_kind = ParseEpsilonKind(Get<std::string>(j, "epsilon"));
    }
  } catch (const ParseError& e) {
    throw SchemaError(e.what());
  }
  if (j.contains("gamma")) {
    const auto g = Get<std::vector<double>>(j, "gamma");
    s.gamma_true = Eigen::Map<const Vector>(g.data(), static_cast<Eigen::Index>(g.size()));
  }
  if (j.contains("reps")) s.reps = Get<int>(j, "reps");
  if (j.contains("seed")) s.base_seed = Get<std::uint64_t>(j, "seed");
  if (j.contains("pairs")) s.pairs = Get<std::vector<std::pair<int, int>>>(j, "pairs");
  try {
    s.Validate();
  } catch (const ParameterError& e) {
    throw SchemaError(e.what());
  }
  return s;
}

json ScenarioToJson(const Scenario& s) {
  return {{"n", s.n},
          {"L", std::string(ToString(s.l_kind))},
          {"epsilon", std::string(ToString(s.epsilon_kind))},
          {"gamma", std::vector<double>(s.gamma_true.begin(), s.gamma_true.end())},
          {"reps", s.reps},
          {"seed", s.base_seed},
          {"pairs", s.ResolvedPairs()}};
}

FiveNumber Summarize(std::vector<long> values) {
  if (values.empty()) throw DomainError("summary of an empty sequence");
  std::sort(values.begin(), values.end());
  auto q = [&](double p) {
    const double h = (values.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - lo) * (values[hi] - values[lo]);
  };
  return {static_cast<double>(values.front()), q(0.25), q(0.5), q(0.75),
          static_cast<double>(values.back())};
}

// ---------------------------------------------------------------------------
// Lazega

AttributeSchema LazegaSchema() {
  using K = AttributeKind;
  using R = CovariateRule;
  return {{{"identity", K::kCategorical, R::kMatchSign},
           {"gender", K::kCategorical, R::kMatchSign},
           {"location", K::kCategorical, R::kMatchSign},
           {"years", K::kContinuous, R::kAbsDistance},
           {"age", K::kContinuous, R::kAbsDistance},
           {"practice", K::kCategorical, R::kMatchSign},
           {"school", K::kCategorical, R::kMatchSign}}};
}

void ConvertLazega(const std::filesystem::path& work,
                   const std::filesystem::path& attr,
                   const std::filesystem::path& out) {
  auto read_rows = [](const std::filesystem::path& path) {
    auto in = OpenOrThrow(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ss(line);
      std::vector<std::string> cells;
      for (std::string c; ss >> c;) cells.push_back(c);
      rows.push_back(std::move(cells));
    }
    while (!rows.empty() && rows.back().empty()) rows.pop_back();
    return rows;
  };
  const auto adj = read_rows(work);
  const auto att = read_rows(attr);
  const std::size_t n = adj.size();
  if (n < 2) throw ParseError(work.string() + ": too few rows");
  for (std::size_t i = 0; i < n; ++i) {
    if (adj[i].size() != n) {
      throw ParseError(work.string() + ": expected " + std::to_string(n) +
                           " entries",
                       static_cast<int>(i + 1));
    }
  }
  if (att.size() != n) {
    throw ParseError(attr.string() + ": expected " + std::to_string(n) + " rows");
  }
  // seniority, status, gender, office, years, age, practice, school
  for (std::size_t i = 0; i < n; ++i) {
    if (att[i].size() != 8) {
      throw ParseError(attr.string() + ": expected 8 columns",
                       static_cast<int>(i + 1));
    }
  }
  std::filesystem::create_directories(out);
  std::ofstream edges(out / "edges.csv");
  edges << "src,dst\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::string& v = adj[i][j];
      if (v != "0" && v != "1") {
        throw ParseError(work.string() + ": entries must be 0 or 1",
                         static_cast<int>(i + 1));
      }
      if (v == "1" && i != j) edges << i + 1 << ',' << j + 1 << '\n';
    }
  }
  std::ofstream attrs(out / "attrs.csv");
  attrs << "id,identity,gender,location,years,age,practice,school\n";
  for (std::size_t i = 0; i < n; ++i) {
    attrs << i + 1;
    for (int c = 1; c < 8; ++c) attrs << ',' << att[i][c];
    attrs << '\n';
  }
  std::ofstream schema(out / "schema.json");
  schema << LazegaSchema().ToJson().dump(2) << '\n';
}

}  // namespace dpdg
