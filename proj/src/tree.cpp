#include "ssc/tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace ssc {

std::vector<std::vector<Vertex>> RootedTree::children() const {
  std::vector<std::vector<Vertex>> ch(parent.size());
  for (std::size_t v = 0; v < parent.size(); ++v)
    if (parent[v] != kNoParent) ch[static_cast<std::size_t>(parent[v])].push_back(static_cast<Vertex>(v));
  return ch;
}

std::vector<Vertex> RootedTree::depth() const {
  const auto ch = children();
  std::vector<Vertex> d(parent.size(), 0);
  std::vector<Vertex> stack{root};
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    for (Vertex c : ch[static_cast<std::size_t>(v)]) {
      d[static_cast<std::size_t>(c)] = d[static_cast<std::size_t>(v)] + 1;
      stack.push_back(c);
    }
  }
  return d;
}

bool RootedTree::valid() const {
  const auto n = parent.size();
  if (n == 0 || root < 0 || static_cast<std::size_t>(root) >= n) return false;
  if (parent[static_cast<std::size_t>(root)] != kNoParent) return false;
  for (std::size_t v = 0; v < n; ++v) {
    if (static_cast<Vertex>(v) == root) continue;
    const Vertex p = parent[v];
    if (p < 0 || static_cast<std::size_t>(p) >= n) return false;
  }
  // every vertex reaches the root
  std::size_t reached = 0;
  const auto ch = children();
  std::vector<Vertex> stack{root};
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    ++reached;
    if (reached > n) return false;
    for (Vertex c : ch[static_cast<std::size_t>(v)]) stack.push_back(c);
  }
  return reached == n;
}

RootedTree RootedTree::from_edges(std::size_t n, const std::vector<std::pair<Vertex, Vertex>>& edges,
                                  Vertex root) {
  if (edges.size() + 1 != n) throw std::invalid_argument("from_edges: need n-1 edges");
  std::vector<std::vector<Vertex>> adj(n);
  for (auto [a, b] : edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  RootedTree t;
  t.parent.assign(n, kNoParent);
  t.root = root;
  std::vector<char> seen(n, 0);
  std::vector<Vertex> stack{root};
  seen[static_cast<std::size_t>(root)] = 1;
  std::size_t count = 0;
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    ++count;
    for (Vertex w : adj[static_cast<std::size_t>(v)]) {
      if (seen[static_cast<std::size_t>(w)]) continue;
      seen[static_cast<std::size_t>(w)] = 1;
      t.parent[static_cast<std::size_t>(w)] = v;
      stack.push_back(w);
    }
  }
  if (count != n) throw std::invalid_argument("from_edges: edges do not form a tree");
  return t;
}

std::string canonical_code(const RootedTree& t) {
  const auto n = t.size();
  const auto ch = t.children();
  std::vector<std::string> code(n);
  // iterative post-order
  std::vector<std::pair<Vertex, bool>> stack{{t.root, false}};
  std::vector<std::string> parts;
  while (!stack.empty()) {
    auto [v, expanded] = stack.back();
    stack.pop_back();
    const auto& kids = ch[static_cast<std::size_t>(v)];
    if (!expanded) {
      stack.push_back({v, true});
      for (Vertex c : kids) stack.push_back({c, false});
      continue;
    }
    parts.clear();
    std::size_t len = 2;
    for (Vertex c : kids) {
      parts.push_back(std::move(code[static_cast<std::size_t>(c)]));
      len += parts.back().size();
    }
    std::sort(parts.begin(), parts.end());
    std::string& out = code[static_cast<std::size_t>(v)];
    out.reserve(len);
    out.push_back('(');
    for (auto& p : parts) out += p;
    out.push_back(')');
  }
  return std::move(code[static_cast<std::size_t>(t.root)]);
}

std::string code_to_hex(std::string_view code) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string hex;
  const std::size_t nbytes = (code.size() + 7) / 8;
  hex.reserve(2 * nbytes);
  for (std::size_t b = 0; b < nbytes; ++b) {
    unsigned byte = 0;
    for (std::size_t i = 0; i < 8; ++i) {
      const std::size_t pos = 8 * b + i;
      byte <<= 1;
      if (pos < code.size() && code[pos] == '(') byte |= 1;
    }
    hex.push_back(digits[byte >> 4]);
    hex.push_back(digits[byte & 15]);
  }
  return hex;
}

std::string hex_to_code(std::string_view hex) {
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    throw std::invalid_argument("hex_to_code: bad digit");
  };
  if (hex.size() % 2 != 0) throw std::invalid_argument("hex_to_code: odd length");
  std::string code;
  long balance = 0;
  for (std::size_t b = 0; b < hex.size(); b += 2) {
    const unsigned byte = (nibble(hex[b]) << 4) | nibble(hex[b + 1]);
    for (int i = 7; i >= 0; --i) {
      const bool open = (byte >> i) & 1;
      code.push_back(open ? '(' : ')');
      balance += open ? 1 : -1;
      if (balance == 0) return code;
      if (balance < 0) throw std::invalid_argument("hex_to_code: unbalanced");
    }
  }
  throw std::invalid_argument("hex_to_code: truncated code");
}

RootedTree tree_from_code(std::string_view code) {
  RootedTree t;
  t.parent.clear();
  std::vector<Vertex> stack;
  for (char c : code) {
    if (c == '(') {
      const auto v = static_cast<Vertex>(t.parent.size());
      t.parent.push_back(stack.empty() ? kNoParent : stack.back());
      stack.push_back(v);
    } else if (c == ')') {
      if (stack.empty()) throw std::invalid_argument("tree_from_code: unbalanced");
      stack.pop_back();
    } else {
      throw std::invalid_argument("tree_from_code: bad character");
    }
  }
  if (!stack.empty() || t.parent.empty()) throw std::invalid_argument("tree_from_code: unbalanced");
  t.root = 0;
  return t;
}

RootedTree reroot(const RootedTree& t, Vertex new_root) {
  RootedTree r = t;
  // reverse the path from new_root up to the old root
  Vertex prev = kNoParent;
  Vertex v = new_root;
  while (v != kNoParent) {
    const Vertex next = t.parent[static_cast<std::size_t>(v)];
    r.parent[static_cast<std::size_t>(v)] = prev;
    prev = v;
    v = next;
  }
  r.root = new_root;
  return r;
}

RootedTree join(const RootedTree& a, Vertex v, const RootedTree& b) {
  RootedTree t;
  const auto na = static_cast<Vertex>(a.size());
  t.parent = a.parent;
  t.root = a.root;
  t.parent.reserve(a.size() + b.size());
  for (std::size_t u = 0; u < b.size(); ++u) {
    const Vertex p = b.parent[u];
    t.parent.push_back(p == kNoParent ? v : p + na);
  }
  return t;
}

std::size_t degree(const RootedTree& t, Vertex v) {
  std::size_t d = t.parent[static_cast<std::size_t>(v)] == kNoParent ? 0 : 1;
  for (Vertex p : t.parent) d += (p == v);
  return d;
}

std::size_t height(const RootedTree& t) {
  const auto d = t.depth();
  return static_cast<std::size_t>(*std::max_element(d.begin(), d.end()));
}

bool AgedTree::legal() const {
  const auto n = tree.size();
  if (vertex_age.size() != n || edge_age.size() != n) return false;
  for (std::size_t v = 0; v < n; ++v) {
    if (!(vertex_age[v] >= 0.0)) return false;
    const Vertex p = tree.parent[v];
    if (p == kNoParent) continue;
    const double e = edge_age[v];
    if (!(e >= 0.0)) return false;
    if (!(e < vertex_age[v] && e < vertex_age[static_cast<std::size_t>(p)])) return false;
  }
  return true;
}

AgedTree reroot(const AgedTree& t, Vertex new_root) {
  AgedTree r;
  r.tree = reroot(t.tree, new_root);
  r.vertex_age = t.vertex_age;
  r.edge_age.assign(t.size(), 0.0);
  // edge ages move with the edge: for each old edge (p, v) find its new child
  for (std::size_t v = 0; v < t.size(); ++v) {
    const Vertex p = t.tree.parent[v];
    if (p == kNoParent) continue;
    const auto vi = static_cast<Vertex>(v);
    if (r.tree.parent[v] == p) r.edge_age[v] = t.edge_age[v];
    else r.edge_age[static_cast<std::size_t>(p)] = t.edge_age[v];
    (void)vi;
  }
  return r;
}

}  // namespace ssc
