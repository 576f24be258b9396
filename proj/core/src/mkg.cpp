#include "kgamc/mkg.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "kgamc/error.hpp"

namespace kgamc::mkg {
namespace {

constexpr std::array<std::string_view, kNumNodeTypes> kNodeTypeNames = {
    "modulationMethod", "modulationType",   "base",        "bandwidthLevel",
    "situation",        "modulationTheory", "carrierType", "dataType",
};

constexpr std::array<std::string_view, kNumRelations> kRelationNames = {
    "possesses", "isBaseOf", "hasBandwidthIn", "adopts", "includes", "isUsedIn", "isModulatedBy",
};

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos
                                                                      : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\r')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\r')) f.remove_suffix(1);
  }
  return fields;
}

}  // namespace

std::string_view to_string(NodeType t) { return kNodeTypeNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(RelationType r) { return kRelationNames[static_cast<std::size_t>(r)]; }

std::optional<NodeType> parse_node_type(std::string_view name) {
  // The ontology table's "modualtionMethod" spelling is accepted as a typo.
  if (name == "modualtionMethod") return NodeType::modulationMethod;
  for (std::size_t i = 0; i < kNumNodeTypes; ++i) {
    if (kNodeTypeNames[i] == name) return static_cast<NodeType>(i);
  }
  return std::nullopt;
}

std::optional<RelationType> parse_relation(std::string_view name) {
  for (std::size_t i = 0; i < kNumRelations; ++i) {
    if (kRelationNames[i] == name) return static_cast<RelationType>(i);
  }
  return std::nullopt;
}

void TripleSet::declare(const std::string& name, NodeType type) {
  auto [it, inserted] = node_types.emplace(name, type);
  if (inserted) {
    declaration_order.push_back(name);
  } else if (it->second != type) {
    throw ConfigError("node '" + name + "' declared as both " + std::string(to_string(it->second)) +
                      " and " + std::string(to_string(type)));
  }
}

bool TripleSet::add(Triple t) {
  for (const auto& existing : triples) {
    if (existing.same_fact(t)) return false;
  }
  triples.push_back(std::move(t));
  return true;
}

TripleSet parse_triples(std::string_view text) {
  TripleSet set;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                          : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto fields = split_tabs(line);
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != 3) {
      throw ParseError("expected 3 tab-separated fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    for (const auto& f : fields) {
      if (f.empty()) throw ParseError("empty field", line_no);
    }
    if (fields[0] == "@node") {
      const auto type = parse_node_type(fields[2]);
      if (!type) throw ParseError("unknown node type '" + std::string(fields[2]) + "'", line_no);
      try {
        set.declare(std::string(fields[1]), *type);
      } catch (const ConfigError& e) {
        throw ParseError(e.what(), line_no);
      }
      continue;
    }
    const auto relation = parse_relation(fields[1]);
    if (!relation) throw ParseError("unknown relation '" + std::string(fields[1]) + "'", line_no);
    set.add(Triple{std::string(fields[0]), *relation, std::string(fields[2]), line_no});
  }
  for (const auto& t : set.triples) {
    for (const auto* name : {&t.head, &t.tail}) {
      if (!set.node_types.contains(*name)) {
        throw ParseError("undeclared node '" + *name + "'", t.line);
      }
    }
  }
  return set;
}

TripleSet load_triples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_triples(buf.str());
}

std::vector<Violation> validate_ontology(const TripleSet& set) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < set.triples.size(); ++i) {
    const auto& t = set.triples[i];
    const auto& sig = kOntology[static_cast<std::size_t>(t.relation)];
    const auto head = set.node_types.find(t.head);
    const auto tail = set.node_types.find(t.tail);
    std::string where = "(" + t.head + ", " + std::string(to_string(t.relation)) + ", " + t.tail + ")";
    if (t.line) where += " at line " + std::to_string(t.line);
    if (head == set.node_types.end() || tail == set.node_types.end()) {
      out.push_back({i, where + ": undeclared node"});
      continue;
    }
    if (head->second != sig.head || tail->second != sig.tail) {
      out.push_back({i, where + ": signature " + std::string(to_string(head->second)) + " -> " +
                            std::string(to_string(tail->second)) + " does not match " +
                            std::string(to_string(sig.head)) + " -> " +
                            std::string(to_string(sig.tail))});
    }
  }
  return out;
}

std::size_t HeteroGraph::num_edges() const {
  std::size_t n = 0;
  for (const auto& e : edges) n += e.size();
  return n;
}

std::optional<std::size_t> HeteroGraph::find(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

HeteroGraph HeteroGraph::from_edges(std::vector<std::string> names, std::vector<NodeType> types,
                                    std::array<std::vector<Edge>, kNumRelations> edges) {
  if (names.size() != types.size()) throw ConfigError("node name/type count mismatch");
  HeteroGraph g;
  g.names = std::move(names);
  g.types = std::move(types);
  const std::size_t a = g.names.size();
  g.adjacency.assign(a * a, 0);
  for (std::size_t r = 0; r < kNumRelations; ++r) {
    for (const auto& e : edges[r]) {
      if (e.src >= a || e.dst >= a) throw ConfigError("edge endpoint out of range");
      const bool duplicate = std::any_of(g.edges[r].begin(), g.edges[r].end(), [&](const Edge& x) {
        return x.src == e.src && x.dst == e.dst;
      });
      if (duplicate) continue;
      g.edges[r].push_back(e);
      g.adjacency[e.src * a + e.dst] = 1;
    }
  }
  return g;
}

HeteroGraph build_graph(const TripleSet& set) {
  const auto violations = validate_ontology(set);
  if (!violations.empty()) {
    throw OntologyError(std::to_string(violations.size()) +
                        " ontology violation(s); first: " + violations.front().message);
  }
  std::vector<std::string> names;
  std::map<std::string, std::size_t> index;
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = index.emplace(name, names.size());
    if (inserted) names.push_back(name);
    return it->second;
  };
  std::array<std::vector<Edge>, kNumRelations> edges;
  for (const auto& t : set.triples) {
    const auto h = intern(t.head);
    const auto tl = intern(t.tail);
    edges[static_cast<std::size_t>(t.relation)].push_back({h, tl});
  }
  for (const auto& name : set.declaration_order) intern(name);
  std::vector<NodeType> types;
  types.reserve(names.size());
  for (const auto& n : names) types.push_back(set.node_types.at(n));
  return HeteroGraph::from_edges(std::move(names), std::move(types), std::move(edges));
}

std::vector<DegreeStats> degree_stats(const HeteroGraph& g) {
  const std::size_t a = g.num_nodes();
  std::vector<DegreeStats> stats(a);
  std::vector<std::vector<std::size_t>> neighbours(a);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < a; ++j) {
      if (i != j && (g.adjacent(i, j) || g.adjacent(j, i))) neighbours[i].push_back(j);
    }
  }
  for (const auto& rel : g.edges) {
    for (const auto& e : rel) {
      ++stats[e.src].out_degree;
      ++stats[e.dst].in_degree;
    }
  }
  std::vector<char> mark(a);
  for (std::size_t i = 0; i < a; ++i) {
    std::fill(mark.begin(), mark.end(), 0);
    mark[i] = 1;
    for (auto j : neighbours[i]) mark[j] = 1;
    stats[i].first_order = neighbours[i].size();
    for (auto j : neighbours[i]) {
      for (auto k : neighbours[j]) {
        if (!mark[k]) {
          mark[k] = 1;
          ++stats[i].second_order;
        }
      }
    }
  }
  return stats;
}

nn::Tensor<double> raw_node_features(const HeteroGraph& g) {
  const std::size_t a = g.num_nodes();
  const std::size_t b = feature_width(a);
  nn::Tensor<double> m({a, b});
  const auto stats = degree_stats(g);
  for (std::size_t i = 0; i < a; ++i) {
    double* row = m.data.data() + i * b;
    row[0] = static_cast<double>(stats[i].first_order);
    row[1] = static_cast<double>(stats[i].second_order);
    row[2] = static_cast<double>(stats[i].out_degree);
    row[3] = static_cast<double>(stats[i].in_degree);
    row[4 + static_cast<std::size_t>(g.types[i])] = 1.0;
    for (std::size_t j = 0; j < a; ++j) row[4 + kNumNodeTypes + j] = g.adjacent(i, j) ? 1.0 : 0.0;
  }
  return m;
}

template <typename T>
nn::Tensor<T> init_node_features(const HeteroGraph& g) {
  if (g.num_nodes() == 0) throw ConfigError("cannot featurize an empty graph");
  auto raw = raw_node_features(g);
  const std::size_t a = g.num_nodes();
  const std::size_t b = feature_width(a);
  for (std::size_t c = 0; c < 4; ++c) {
    double lo = raw.data[c], hi = raw.data[c];
    for (std::size_t i = 0; i < a; ++i) {
      lo = std::min(lo, raw.data[i * b + c]);
      hi = std::max(hi, raw.data[i * b + c]);
    }
    for (std::size_t i = 0; i < a; ++i) {
      auto& v = raw.data[i * b + c];
      v = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    }
  }
  nn::Tensor<T> out(raw.shape);
  for (std::size_t i = 0; i < raw.size(); ++i) out.data[i] = static_cast<T>(raw.data[i]);
  return out;
}

template nn::Tensor<float> init_node_features(const HeteroGraph&);
template nn::Tensor<double> init_node_features(const HeteroGraph&);

std::vector<std::size_t> anchors(const HeteroGraph& g, const std::vector<std::string>& classes) {
  std::vector<std::size_t> out;
  out.reserve(classes.size());
  for (const auto& cls : classes) {
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      if (g.types[i] == NodeType::modulationMethod && g.names[i] == cls) found = i;
    }
    if (!found) {
      throw ConfigError("class '" + cls + "' has no modulationMethod node in the knowledge graph");
    }
    out.push_back(*found);
  }
  return out;
}

std::vector<std::size_t> anchors(const HeteroGraph& g, const std::vector<ModulationClass>& classes) {
  return anchors(g, class_names(classes));
}

}  // namespace kgamc::mkg
