#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bierstar/error.hpp"
#include "bierstar/geogrid.hpp"

namespace bierstar {

inline constexpr int kHeaderVersion = 1;
inline constexpr int kMaxChildren = 7;
inline constexpr int kMaxTreeNodes = 65535;

struct TreeNode {
  CellId cell;
  bool dest = false;
  std::vector<int> children;  // node positions

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Cell-level route plan. nodes[0] is the root. Canonical form stores nodes in
// pre-order with children sorted by ascending cell index.
class CellTree {
 public:
  CellTree() = default;
  explicit CellTree(CellId root) { nodes_.push_back({root, false, {}}); }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const TreeNode& root() const { return nodes_.front(); }
  const TreeNode& node(int k) const { return nodes_[static_cast<std::size_t>(k)]; }

  int find(const CellId& c) const {
    for (std::size_t k = 0; k < nodes_.size(); ++k)
      if (nodes_[k].cell == c) return static_cast<int>(k);
    return -1;
  }
  bool contains(const CellId& c) const { return find(c) >= 0; }

  int add_child(int parent_node, const CellId& c) {
    nodes_.push_back({c, false, {}});
    const int k = static_cast<int>(nodes_.size()) - 1;
    nodes_[static_cast<std::size_t>(parent_node)].children.push_back(k);
    return k;
  }

  void set_dest(int k, bool v = true) { nodes_[static_cast<std::size_t>(k)].dest = v; }

  std::vector<CellId> dest_cells() const {
    std::vector<CellId> out;
    for (const auto& n : nodes_)
      if (n.dest) out.push_back(n.cell);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<CellId> cells() const {
    std::vector<CellId> out;
    for (const auto& n : nodes_) out.push_back(n.cell);
    std::sort(out.begin(), out.end());
    return out;
  }

  // Copy of the subtree below node k, in canonical form.
  CellTree subtree(int k) const {
    CellTree t;
    copy_preorder(k, t);
    return t;
  }

  CellTree canonical() const { return empty() ? CellTree{} : subtree(0); }

  friend bool operator==(const CellTree& a, const CellTree& b) { return a.canonical().nodes_ == b.canonical().nodes_; }

 private:
  void copy_preorder(int k, CellTree& out) const {
    const TreeNode& src = node(k);
    out.nodes_.push_back({src.cell, src.dest, {}});
    const std::size_t me = out.nodes_.size() - 1;
    std::vector<int> kids = src.children;
    std::sort(kids.begin(), kids.end(), [&](int x, int y) { return node(x).cell < node(y).cell; });
    for (int c : kids) {
      out.nodes_[me].children.push_back(static_cast<int>(out.nodes_.size()));
      copy_preorder(c, out);
    }
  }

  std::vector<TreeNode> nodes_;
};

struct ShellTree {
  int shell_id = 0;
  int resolution = 0;
  CellTree tree;

  friend bool operator==(const ShellTree&, const ShellTree&) = default;
};

struct Header {
  int version = kHeaderVersion;
  std::uint32_t group_id = 0;
  std::vector<ShellTree> shells;

  friend bool operator==(const Header&, const Header&) = default;
};

// ---------------------------------------------------------------------------
// Bit-level codec, most significant bit first.

class BitWriter {
 public:
  void put(std::uint64_t value, int width) {
    for (int b = width - 1; b >= 0; --b) {
      if (bits_ % 8 == 0) bytes_.push_back(0);
      if ((value >> b) & 1U) bytes_.back() |= static_cast<std::uint8_t>(0x80U >> (bits_ % 8));
      ++bits_;
    }
  }
  std::size_t bit_length() const { return bits_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint64_t get(int width) {
    if (pos_ + static_cast<std::size_t>(width) > bytes_.size() * 8) fail(ErrorKind::Parse, "truncated header");
    std::uint64_t v = 0;
    for (int b = 0; b < width; ++b, ++pos_) v = (v << 1) | ((bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1U);
    return v;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() * 8 - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

struct EncodedHeader {
  std::vector<std::uint8_t> bytes;
  std::size_t bit_length = 0;  // before padding
};

// Unpadded length in bits, computed from the layout alone.
inline std::size_t header_bit_length(const Header& h) {
  std::size_t bits = 4 + 32 + 4;
  for (const auto& s : h.shells) bits += 4 + 4 + 16 + s.tree.size() * static_cast<std::size_t>(hex_bits(s.resolution) + 3 + 1);
  return bits;
}

inline void check_tree(const ShellTree& s) {
  if (s.shell_id < 0 || s.shell_id > 15) fail(ErrorKind::InvalidArgument, "shell id does not fit in 4 bits");
  if (s.resolution < 0 || s.resolution > kMaxHexRes) fail(ErrorKind::InvalidArgument, "resolution out of range 0..5");
  if (s.tree.empty()) fail(ErrorKind::InvalidArgument, "shell tree has no nodes");
  if (s.tree.size() > kMaxTreeNodes) fail(ErrorKind::InvalidArgument, "too many tree nodes");
  std::unordered_set<CellId> seen;
  const std::uint64_t count = cell_count(GridScheme::hex(), s.resolution);
  for (const auto& n : s.tree.nodes()) {
    if (n.cell.scheme.tag != SchemeTag::HexHier || n.cell.resolution != s.resolution) fail(ErrorKind::InvalidArgument, "tree cell at wrong resolution");
    if (n.cell.index >= count) fail(ErrorKind::InvalidArgument, "cell index out of range");
    if (n.children.size() > kMaxChildren) fail(ErrorKind::InvalidArgument, "child count overflow");
    if (!seen.insert(n.cell).second) fail(ErrorKind::InvalidArgument, "duplicate cell in tree");
  }
}

inline EncodedHeader serialize(const Header& h) {
  if (h.version != kHeaderVersion) fail(ErrorKind::InvalidArgument, "unsupported header version");
  if (h.shells.empty()) fail(ErrorKind::InvalidArgument, "header needs at least one shell");
  if (h.shells.size() > 15) fail(ErrorKind::InvalidArgument, "too many shells");
  BitWriter w;
  w.put(static_cast<std::uint64_t>(h.version), 4);
  w.put(h.group_id, 32);
  w.put(h.shells.size(), 4);
  for (const auto& s : h.shells) {
    check_tree(s);
    const CellTree t = s.tree.canonical();
    const int bits = hex_bits(s.resolution);
    w.put(static_cast<std::uint64_t>(s.shell_id), 4);
    w.put(static_cast<std::uint64_t>(s.resolution), 4);
    w.put(t.size(), 16);
    for (const auto& n : t.nodes()) {
      w.put(n.cell.index, bits);
      w.put(n.children.size(), 3);
      w.put(n.dest ? 1 : 0, 1);
    }
  }
  return {w.bytes(), w.bit_length()};
}

inline Header parse(const std::vector<std::uint8_t>& bytes) {
  BitReader r(bytes);
  Header h;
  h.version = static_cast<int>(r.get(4));
  if (h.version != kHeaderVersion) fail(ErrorKind::Parse, "unknown header version " + std::to_string(h.version));
  h.group_id = static_cast<std::uint32_t>(r.get(32));
  const int shell_count = static_cast<int>(r.get(4));
  if (shell_count == 0) fail(ErrorKind::Parse, "header has no shells");
  for (int s = 0; s < shell_count; ++s) {
    ShellTree st;
    st.shell_id = static_cast<int>(r.get(4));
    st.resolution = static_cast<int>(r.get(4));
    if (st.resolution > kMaxHexRes) fail(ErrorKind::Parse, "resolution out of range 0..5");
    const std::size_t node_count = r.get(16);
    if (node_count == 0) fail(ErrorKind::Parse, "empty shell tree");
    const int bits = hex_bits(st.resolution);
    const std::uint64_t count = cell_count(GridScheme::hex(), st.resolution);

    // Rebuild from pre-order child counts; `open` holds nodes still owed children.
    std::vector<std::pair<int, int>> open;
    CellTree t;
    std::unordered_set<CellId> seen;
    for (std::size_t k = 0; k < node_count; ++k) {
      const std::uint64_t idx = r.get(bits);
      const int kids = static_cast<int>(r.get(3));
      const bool dest = r.get(1) != 0;
      if (idx >= count) fail(ErrorKind::Parse, "cell index out of range");
      const CellId c = hex_cell(st.resolution, idx);
      if (!seen.insert(c).second) fail(ErrorKind::Parse, "duplicate cell in tree");
      int me;
      if (k == 0) {
        t = CellTree(c);
        me = 0;
      } else {
        if (open.empty()) fail(ErrorKind::Parse, "node count exceeds tree structure");
        const int parent = open.back().first;
        const auto& siblings = t.node(parent).children;
        if (!siblings.empty() && !(t.node(siblings.back()).cell < c)) fail(ErrorKind::Parse, "children not in canonical order");
        me = t.add_child(parent, c);
        if (--open.back().second == 0) open.pop_back();
      }
      t.set_dest(me, dest);
      if (kids > 0) open.emplace_back(me, kids);
    }
    if (!open.empty()) fail(ErrorKind::Parse, "node count smaller than tree structure");
    st.tree = std::move(t);
    h.shells.push_back(std::move(st));
  }
  const std::size_t rest = r.remaining();
  if (rest >= 8) fail(ErrorKind::Parse, "trailing bytes after header");
  if (rest > 0 && r.get(static_cast<int>(rest)) != 0) fail(ErrorKind::Parse, "non-zero padding");
  return h;
}

inline std::string to_hex(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (auto b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

}  // namespace bierstar
