#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "clutter/geometry.hpp"
#include "clutter/rng.hpp"

namespace clutter {

struct DirectionChoice {
  UnitDir dir = UnitDir::plus_z();
  double safety = 1.0;
};

// DAG over object ids; edge (i, j) means "i supports j". Also carries the
// per-node retrieval direction chosen during broadcasting and the running
// count of dynamics-edge queries.
struct SupportGraph {
  std::set<int> nodes;
  std::set<std::pair<int, int>> edges;
  std::map<int, DirectionChoice> direction_cache;
  std::set<int> expanded;
  long query_count = 0;

  bool has_node(int i) const { return nodes.count(i) > 0; }
  bool has_edge(int i, int j) const { return edges.count({i, j}) > 0; }

  std::vector<int> children(int i) const {
    std::vector<int> out;
    for (const auto& [a, b] : edges)
      if (a == i) out.push_back(b);
    return out;
  }
  std::vector<int> parents(int j) const {
    std::vector<int> out;
    for (const auto& [a, b] : edges)
      if (b == j) out.push_back(a);
    return out;
  }
  int out_degree(int i) const {
    int n = 0;
    for (const auto& [a, b] : edges)
      if (a == i) ++n;
    return n;
  }

  // every node reachable from i by directed edges (excluding i itself)
  std::set<int> reachable_from(int i) const {
    std::set<int> seen;
    std::vector<int> stack{i};
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      for (int c : children(cur))
        if (seen.insert(c).second) stack.push_back(c);
    }
    seen.erase(i);
    return seen;
  }

  // Throws on self-edges and on edges that would close a directed cycle.
  void add_edge(int i, int j) {
    if (i == j) throw std::runtime_error("mutual support detected (self-edge)");
    if (j != i && (reachable_from(j).count(i) > 0))
      throw std::runtime_error("mutual support detected");
    nodes.insert(i);
    nodes.insert(j);
    edges.insert({i, j});
  }

  void erase_node(int i) {
    nodes.erase(i);
    expanded.erase(i);
    direction_cache.erase(i);
    for (auto it = edges.begin(); it != edges.end();)
      it = (it->first == i || it->second == i) ? edges.erase(it) : ++it;
  }

  bool is_acyclic() const {
    // Kahn
    std::map<int, int> indeg;
    for (int n : nodes) indeg[n] = 0;
    for (const auto& [a, b] : edges) indeg[b]++;
    std::vector<int> q;
    for (const auto& [n, d] : indeg)
      if (d == 0) q.push_back(n);
    std::size_t seen = 0;
    while (!q.empty()) {
      int n = q.back();
      q.pop_back();
      ++seen;
      for (const auto& [a, b] : edges)
        if (a == n && --indeg[b] == 0) q.push_back(b);
    }
    return seen == nodes.size();
  }

  std::uint64_t digest() const {
    std::ostringstream os;
    for (int n : nodes) os << 'n' << n << ';';
    for (const auto& [a, b] : edges) os << 'e' << a << '>' << b << ';';
    return fnv1a(os.str());
  }

  std::string to_dot() const {
    std::ostringstream os;
    os << "digraph support {\n";
    for (int n : nodes) os << "  o" << n << ";\n";
    for (const auto& [a, b] : edges) os << "  o" << a << " -> o" << b << ";\n";
    os << "}\n";
    return os.str();
  }
};

}  // namespace clutter
