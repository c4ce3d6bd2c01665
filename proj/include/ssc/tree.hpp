#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ssc {

using Vertex = std::int32_t;
inline constexpr Vertex kNoParent = -1;

// Rooted tree in parent-array form; parent[root] == kNoParent.
struct RootedTree {
  std::vector<Vertex> parent{kNoParent};
  Vertex root = 0;

  std::size_t size() const { return parent.size(); }
  std::vector<std::vector<Vertex>> children() const;
  std::vector<Vertex> depth() const;
  bool valid() const;

  static RootedTree singleton() { return RootedTree{}; }
  static RootedTree from_edges(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges,
                               Vertex root);
};

// AHU code: "(" + sorted child codes + ")" with '(' < ')'.
std::string canonical_code(const RootedTree& t);
std::string code_to_hex(std::string_view code);
std::string hex_to_code(std::string_view hex);
RootedTree tree_from_code(std::string_view code);

RootedTree reroot(const RootedTree& t, Vertex new_root);
// Attach b below vertex v of a; a's root stays the root. Vertices of b are
// appended after those of a.
RootedTree join(const RootedTree& a, Vertex v, const RootedTree& b);
std::size_t degree(const RootedTree& t, Vertex v);
std::size_t height(const RootedTree& t);

// Vertex ages plus the age of the edge from each non-root vertex to its parent
// (edge_age[root] is unused and kept at 0).
struct AgedTree {
  RootedTree tree;
  std::vector<double> vertex_age{0.0};
  std::vector<double> edge_age{0.0};

  std::size_t size() const { return tree.size(); }
  bool legal() const;
};

AgedTree reroot(const AgedTree& t, Vertex new_root);

}  // namespace ssc
