#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgamc/modulation.hpp"
#include "kgamc/nn/tensor.hpp"

// Modulation knowledge graph: typed nodes, the seven typed relations, and
// node featurization.
//
// Triple file (UTF-8, tab separated, '#' starts a comment):
//   @node<TAB><name><TAB><NodeType>
//   <head><TAB><relation><TAB><tail>
namespace kgamc::mkg {

enum class NodeType : std::uint8_t {
  modulationMethod,
  modulationType,
  base,
  bandwidthLevel,
  situation,
  modulationTheory,
  carrierType,
  dataType,
};
inline constexpr std::size_t kNumNodeTypes = 8;

enum class RelationType : std::uint8_t {
  possesses,
  isBaseOf,
  hasBandwidthIn,
  adopts,
  includes,
  isUsedIn,
  isModulatedBy,
};
inline constexpr std::size_t kNumRelations = 7;

struct RelationSignature {
  NodeType head;
  RelationType relation;
  NodeType tail;
};

// One row per relation, indexed by RelationType.
inline constexpr std::array<RelationSignature, kNumRelations> kOntology = {{
    {NodeType::modulationType, RelationType::possesses, NodeType::modulationMethod},
    {NodeType::base, RelationType::isBaseOf, NodeType::modulationMethod},
    {NodeType::bandwidthLevel, RelationType::hasBandwidthIn, NodeType::modulationMethod},
    {NodeType::situation, RelationType::adopts, NodeType::modulationMethod},
    {NodeType::modulationTheory, RelationType::includes, NodeType::modulationType},
    {NodeType::carrierType, RelationType::isUsedIn, NodeType::modulationType},
    {NodeType::dataType, RelationType::isModulatedBy, NodeType::modulationType},
}};

std::string_view to_string(NodeType t);
std::string_view to_string(RelationType r);
std::optional<NodeType> parse_node_type(std::string_view name);
std::optional<RelationType> parse_relation(std::string_view name);

struct Triple {
  std::string head;
  RelationType relation;
  std::string tail;
  std::size_t line = 0;  // source line, 0 when built in code

  bool same_fact(const Triple& o) const {
    return head == o.head && relation == o.relation && tail == o.tail;
  }
};

struct TripleSet {
  std::vector<Triple> triples;
  std::map<std::string, NodeType> node_types;
  std::vector<std::string> declaration_order;

  void declare(const std::string& name, NodeType type);
  // Appends unless the same fact is already present. Returns true if added.
  bool add(Triple t);
};

// Throws ParseError (with line number) on malformed lines, unknown relation or
// type names, conflicting declarations, or triples naming undeclared nodes.
TripleSet parse_triples(std::string_view text);
TripleSet load_triples(const std::filesystem::path& path);

// The curated graph shipped with the library, covering the ten classes.
std::string_view default_triples_text();

struct Violation {
  std::size_t triple_index;
  std::string message;
};

// Empty iff every triple's (head type, relation, tail type) is an ontology row.
std::vector<Violation> validate_ontology(const TripleSet& set);

struct Edge {
  std::size_t src;
  std::size_t dst;
};

struct HeteroGraph {
  std::vector<std::string> names;
  std::vector<NodeType> types;
  std::array<std::vector<Edge>, kNumRelations> edges;  // per relation, head -> tail
  std::vector<std::uint8_t> adjacency;                 // a x a, row = source

  std::size_t num_nodes() const noexcept { return names.size(); }
  std::size_t num_edges() const;
  bool adjacent(std::size_t from, std::size_t to) const {
    return adjacency[from * num_nodes() + to] != 0;
  }
  std::optional<std::size_t> find(std::string_view name) const;

  // Builds from explicit parts; validates endpoints and fills adjacency.
  static HeteroGraph from_edges(std::vector<std::string> names, std::vector<NodeType> types,
                                std::array<std::vector<Edge>, kNumRelations> edges);
};

// Nodes indexed by first appearance in the triples, then declared-but-unused
// nodes in declaration order. Throws OntologyError if validation fails.
HeteroGraph build_graph(const TripleSet& set);

// Per node: [first-order undirected neighbours, nodes at undirected distance
// exactly 2, out-degree, in-degree] counting edges over all relations.
struct DegreeStats {
  std::size_t first_order = 0;
  std::size_t second_order = 0;
  std::size_t out_degree = 0;
  std::size_t in_degree = 0;
};
std::vector<DegreeStats> degree_stats(const HeteroGraph& g);

// a x (12 + a): degree stats, type one-hot, adjacency row. Unscaled.
nn::Tensor<double> raw_node_features(const HeteroGraph& g);

// raw_node_features with each of the four degree columns min-max scaled to
// [0, 1] across nodes (a constant column becomes 0).
template <typename T>
nn::Tensor<T> init_node_features(const HeteroGraph& g);

inline std::size_t feature_width(std::size_t num_nodes) { return 4 + kNumNodeTypes + num_nodes; }

// Node index of each class's modulationMethod node, in class order. Throws
// ConfigError naming the first class without such a node.
std::vector<std::size_t> anchors(const HeteroGraph& g, const std::vector<std::string>& classes);
std::vector<std::size_t> anchors(const HeteroGraph& g, const std::vector<ModulationClass>& classes);

}  // namespace kgamc::mkg
