#pragma once

// Discrete groups at finite scale: multiplication tables, free groups of finite
// rank with reduced words, and integer lattices.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fellap/errors.hpp"

namespace fellap {

/// A group element. The code is only meaningful together with its Group:
/// a single index (finite table), a reduced letter string (free group; letter
/// 2g is generator g, 2g+1 its inverse) or a coordinate vector (lattice).
struct Elem {
  std::vector<int> code;
  /// Fingerprint of the producing group; 0 for hand-built handles, which are
  /// accepted by any group whose element set contains the code.
  std::uint64_t ctx = 0;

  friend bool operator==(const Elem& a, const Elem& b) { return a.code == b.code; }
  friend bool operator!=(const Elem& a, const Elem& b) { return !(a == b); }
  friend bool operator<(const Elem& a, const Elem& b) { return a.code < b.code; }
};

enum class GroupKind { finite, free, lattice };

class Group {
 public:
  /// Finite group from a Cayley table; table[i][j] is the index of i*j.
  /// Throws Error unless the table is a group (checked exhaustively).
  static Group finite(std::vector<std::vector<int>> table, std::string name = {}) {
    const int n = static_cast<int>(table.size());
    if (n == 0) throw Error("finite group: empty table");
    for (const auto& row : table) {
      if (static_cast<int>(row.size()) != n) throw Error("finite group: table is not square");
      for (int v : row)
        if (v < 0 || v >= n) throw Error("finite group: entry out of range");
    }
    int identity = -1;
    for (int i = 0; i < n && identity < 0; ++i) {
      bool ok = true;
      for (int j = 0; j < n && ok; ++j) ok = table[i][j] == j && table[j][i] == j;
      if (ok) identity = i;
    }
    if (identity < 0) throw Error("finite group: no identity element");
    std::vector<int> inverse(n, -1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (table[i][j] == identity && table[j][i] == identity) inverse[i] = j;
    for (int i = 0; i < n; ++i)
      if (inverse[i] < 0) throw Error("finite group: element " + std::to_string(i) + " has no inverse");
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          if (table[table[a][b]][c] != table[a][table[b][c]])
            throw Error("finite group: associativity fails at (" + std::to_string(a) + "," +
                        std::to_string(b) + "," + std::to_string(c) + ")");
    auto impl = std::make_shared<Impl>();
    impl->kind = GroupKind::finite;
    impl->table = std::move(table);
    impl->identity = identity;
    impl->inverse = std::move(inverse);
    impl->name = name.empty() ? "finite(" + std::to_string(n) + ")" : std::move(name);
    return Group(std::move(impl));
  }

  /// Cyclic group Z_m with elements 0..m-1.
  static Group cyclic(int m) {
    if (m < 1) throw Error("cyclic group needs order >= 1");
    std::vector<std::vector<int>> t(m, std::vector<int>(m));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) t[i][j] = (i + j) % m;
    return finite(std::move(t), "Z" + std::to_string(m));
  }

  /// Symmetric group on n points; elements are permutations in lexicographic
  /// order (index 0 is the identity) and (p*q)(i) = p(q(i)).
  static Group symmetric(int n) {
    if (n < 1 || n > 5) throw Error("symmetric group supported for 1 <= n <= 5");
    std::vector<std::vector<int>> perms;
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    const int order = static_cast<int>(perms.size());
    auto index = [&](const std::vector<int>& q) {
      return static_cast<int>(std::lower_bound(perms.begin(), perms.end(), q) - perms.begin());
    };
    std::vector<std::vector<int>> t(order, std::vector<int>(order));
    std::vector<int> q(n);
    for (int a = 0; a < order; ++a)
      for (int b = 0; b < order; ++b) {
        for (int i = 0; i < n; ++i) q[i] = perms[a][perms[b][i]];
        t[a][b] = index(q);
      }
    return finite(std::move(t), "S" + std::to_string(n));
  }

  /// Direct product of two finite groups; (i, j) has index i * |H| + j.
  static Group product(const Group& g, const Group& h) {
    if (!g.is_finite() || !h.is_finite()) throw Unsupported("product of infinite groups");
    const int m = g.order();
    const int n = h.order();
    std::vector<std::vector<int>> t(m * n, std::vector<int>(m * n));
    for (int a = 0; a < m * n; ++a)
      for (int b = 0; b < m * n; ++b)
        t[a][b] = g.impl_->table[a / n][b / n] * n + h.impl_->table[a % n][b % n];
    return finite(std::move(t), g.name() + "x" + h.name());
  }

  static Group free(int rank) {
    if (rank < 1) throw Error("free group needs rank >= 1");
    auto impl = std::make_shared<Impl>();
    impl->kind = GroupKind::free;
    impl->rank = rank;
    impl->name = "F" + std::to_string(rank);
    return Group(std::move(impl));
  }

  static Group lattice(int dim) {
    if (dim < 1) throw Error("lattice needs dimension >= 1");
    auto impl = std::make_shared<Impl>();
    impl->kind = GroupKind::lattice;
    impl->rank = dim;
    impl->name = dim == 1 ? "Z" : "Z^" + std::to_string(dim);
    return Group(std::move(impl));
  }

  GroupKind kind() const { return impl_->kind; }
  bool is_finite() const { return impl_->kind == GroupKind::finite; }
  const std::string& name() const { return impl_->name; }

  /// Order of a finite group.
  int order() const {
    if (!is_finite()) throw Unsupported("order of an infinite group");
    return static_cast<int>(impl_->table.size());
  }
  /// Rank (free) or dimension (lattice).
  int rank() const { return impl_->rank; }

  const std::vector<std::vector<int>>& table() const {
    if (!is_finite()) throw Unsupported("multiplication table of an infinite group");
    return impl_->table;
  }

  bool contains(const Elem& a) const {
    switch (impl_->kind) {
      case GroupKind::finite:
        return a.code.size() == 1 && a.code[0] >= 0 &&
               a.code[0] < static_cast<int>(impl_->table.size());
      case GroupKind::lattice:
        return static_cast<int>(a.code.size()) == impl_->rank;
      case GroupKind::free:
        for (std::size_t i = 0; i < a.code.size(); ++i) {
          if (a.code[i] < 0 || a.code[i] >= 2 * impl_->rank) return false;
          if (i > 0 && (a.code[i] ^ 1) == a.code[i - 1]) return false;
        }
        return true;
    }
    return false;
  }

  Elem id() const {
    switch (impl_->kind) {
      case GroupKind::finite: return tag(Elem{{impl_->identity}});
      case GroupKind::lattice: return tag(Elem{std::vector<int>(impl_->rank, 0)});
      case GroupKind::free: return tag(Elem{});
    }
    return Elem{};
  }

  bool is_identity(const Elem& a) const { return a == id(); }

  Elem mul(const Elem& a, const Elem& b) const {
    check(a);
    check(b);
    switch (impl_->kind) {
      case GroupKind::finite: return tag(Elem{{impl_->table[a.code[0]][b.code[0]]}});
      case GroupKind::lattice: {
        Elem r = a;
        for (int i = 0; i < impl_->rank; ++i) r.code[i] += b.code[i];
        return tag(r);
      }
      case GroupKind::free: {
        Elem r = a;
        for (int letter : b.code) {
          if (!r.code.empty() && (r.code.back() ^ 1) == letter)
            r.code.pop_back();
          else
            r.code.push_back(letter);
        }
        return tag(r);
      }
    }
    return Elem{};
  }

  Elem inv(const Elem& a) const {
    check(a);
    switch (impl_->kind) {
      case GroupKind::finite: return tag(Elem{{impl_->inverse[a.code[0]]}});
      case GroupKind::lattice: {
        Elem r = a;
        for (int& c : r.code) c = -c;
        return tag(r);
      }
      case GroupKind::free: {
        Elem r;
        r.code.reserve(a.code.size());
        for (auto it = a.code.rbegin(); it != a.code.rend(); ++it) r.code.push_back(*it ^ 1);
        return tag(r);
      }
    }
    return Elem{};
  }

  /// Word length: reduced length (free), l1 norm (lattice); a finite group is
  /// generated by all of its elements, so every non-identity element has length 1.
  int word_length(const Elem& a) const {
    check(a);
    switch (impl_->kind) {
      case GroupKind::finite: return a.code[0] == impl_->identity ? 0 : 1;
      case GroupKind::lattice: {
        int s = 0;
        for (int c : a.code) s += std::abs(c);
        return s;
      }
      case GroupKind::free: return static_cast<int>(a.code.size());
    }
    return 0;
  }

  /// Nonempty word in the positive generators only; the identity is not positive.
  bool is_positive(const Elem& a) const {
    if (impl_->kind != GroupKind::free) throw Unsupported("is_positive needs a free group");
    check(a);
    if (a.code.empty()) return false;
    return std::all_of(a.code.begin(), a.code.end(), [](int l) { return (l & 1) == 0; });
  }

  /// Symmetric generating set.
  std::vector<Elem> generators() const {
    std::vector<Elem> gens;
    switch (impl_->kind) {
      case GroupKind::finite:
        for (int i = 0; i < order(); ++i)
          if (i != impl_->identity) gens.push_back(tag(Elem{{i}}));
        break;
      case GroupKind::lattice:
        for (int i = 0; i < impl_->rank; ++i)
          for (int s : {1, -1}) {
            Elem e = id();
            e.code[i] = s;
            gens.push_back(e);
          }
        break;
      case GroupKind::free:
        for (int l = 0; l < 2 * impl_->rank; ++l) gens.push_back(tag(Elem{{l}}));
        break;
    }
    return gens;
  }

  /// Free generator g (0-based) or lattice basis vector e_g.
  Elem generator(int g) const {
    if (g < 0 || g >= impl_->rank || is_finite()) throw Error("generator index out of range");
    if (impl_->kind == GroupKind::free) return tag(Elem{{2 * g}});
    Elem e = id();
    e.code[g] = 1;
    return e;
  }

  /// The lattice point with the given coordinates.
  Elem lattice_point(const std::vector<int>& coords) const {
    if (impl_->kind != GroupKind::lattice || static_cast<int>(coords.size()) != impl_->rank)
      throw ContextMismatch("not a point of " + name());
    return tag(Elem{coords});
  }

  /// All elements of word length <= radius ordered by (length, code); a finite
  /// group is returned whole for every radius.
  std::vector<Elem> ball(int radius) const {
    std::vector<Elem> out;
    if (radius < 0) return out;
    switch (impl_->kind) {
      case GroupKind::finite:
        out.push_back(id());
        for (int i = 0; i < order(); ++i)
          if (i != impl_->identity) out.push_back(tag(Elem{{i}}));
        return out;
      case GroupKind::free: {
        std::vector<Elem> layer{id()};
        out.push_back(id());
        for (int r = 1; r <= radius; ++r) {
          std::vector<Elem> next;
          for (const auto& w : layer)
            for (int l = 0; l < 2 * impl_->rank; ++l) {
              if (!w.code.empty() && (w.code.back() ^ 1) == l) continue;
              Elem x = w;
              x.code.push_back(l);
              next.push_back(std::move(x));
            }
          std::sort(next.begin(), next.end());
          out.insert(out.end(), next.begin(), next.end());
          layer = std::move(next);
        }
        return out;
      }
      case GroupKind::lattice: {
        std::vector<int> v(impl_->rank, 0);
        collect_lattice(0, radius, v, out);
        std::sort(out.begin(), out.end(), [this](const Elem& a, const Elem& b) {
          const int la = word_length(a);
          const int lb = word_length(b);
          return la != lb ? la < lb : a < b;
        });
        return out;
      }
    }
    return out;
  }

  /// Every element of a finite group, identity first.
  std::vector<Elem> elements() const {
    if (!is_finite()) throw Unsupported("cannot enumerate an infinite group");
    return ball(0);
  }

  /// Dense index of a finite-group element.
  int index(const Elem& a) const {
    if (!is_finite()) throw Unsupported("index in an infinite group");
    check(a);
    return a.code[0];
  }

  Elem element(int i) const {
    Elem e{{i}};
    check(e);
    return tag(e);
  }

  std::string format(const Elem& a) const {
    check(a);
    switch (impl_->kind) {
      case GroupKind::finite: return std::to_string(a.code[0]);
      case GroupKind::lattice: {
        if (impl_->rank == 1) return std::to_string(a.code[0]);
        std::string s = "(";
        for (int i = 0; i < impl_->rank; ++i) {
          if (i) s += ",";
          s += std::to_string(a.code[i]);
        }
        return s + ")";
      }
      case GroupKind::free: {
        if (a.code.empty()) return "e";
        std::string s;
        for (int l : a.code) {
          const char c = static_cast<char>('a' + l / 2);
          s += (l & 1) ? static_cast<char>(std::toupper(c)) : c;
        }
        return s;
      }
    }
    return {};
  }

  /// Inverse of format. Free words may be unreduced and are reduced on input;
  /// lattice vectors accept "(1,2)", "1,2" or "1 2".
  Elem parse(const std::string& text) const {
    switch (impl_->kind) {
      case GroupKind::finite: {
        try {
          std::size_t used = 0;
          const int i = std::stoi(text, &used);
          if (used != text.size()) throw Error("");
          Elem e{{i}};
          check(e);
          return tag(e);
        } catch (const std::exception&) {
          throw ContextMismatch("'" + text + "' is not an element of " + name());
        }
      }
      case GroupKind::lattice: {
        std::vector<int> v;
        std::string cur;
        auto flush = [&] {
          if (cur.empty()) return;
          try {
            v.push_back(std::stoi(cur));
          } catch (const std::exception&) {
            throw ContextMismatch("'" + text + "' is not an element of " + name());
          }
          cur.clear();
        };
        for (char c : text) {
          if (c == '(' || c == ')' || c == ',' || c == ' ' || c == ';')
            flush();
          else
            cur += c;
        }
        flush();
        Elem e{std::move(v)};
        if (!contains(e)) throw ContextMismatch("'" + text + "' is not an element of " + name());
        return tag(e);
      }
      case GroupKind::free: {
        Elem r;
        if (text == "e" || text.empty()) return id();
        for (char c : text) {
          const int g = std::tolower(static_cast<unsigned char>(c)) - 'a';
          if (!std::isalpha(static_cast<unsigned char>(c)) || g >= impl_->rank)
            throw ContextMismatch("'" + text + "' is not a word in " + name());
          const int letter = 2 * g + (std::isupper(static_cast<unsigned char>(c)) ? 1 : 0);
          r = mul(r, Elem{{letter}});
        }
        return r;
      }
    }
    return Elem{};
  }

  friend bool operator==(const Group& a, const Group& b) {
    if (a.impl_ == b.impl_) return true;
    return a.impl_->kind == b.impl_->kind && a.impl_->rank == b.impl_->rank &&
           a.impl_->table == b.impl_->table;
  }
  friend bool operator!=(const Group& a, const Group& b) { return !(a == b); }

  void check(const Elem& a) const {
    if (!contains(a) || (a.ctx != 0 && a.ctx != impl_->fingerprint)) throw ContextMismatch("element does not belong to " + name());
  }

 private:
  struct Impl {
    GroupKind kind = GroupKind::finite;
    int rank = 0;
    std::vector<std::vector<int>> table;
    int identity = 0;
    std::vector<int> inverse;
    std::string name;
    std::uint64_t fingerprint = 0;
  };

  explicit Group(std::shared_ptr<Impl> impl) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 1099511628211ULL;
    };
    mix(static_cast<std::uint64_t>(impl->kind) + 1);
    mix(static_cast<std::uint64_t>(impl->rank));
    for (const auto& row : impl->table)
      for (int v : row) mix(static_cast<std::uint64_t>(v) + 7);
    impl->fingerprint = h == 0 ? 1 : h;
    impl_ = std::move(impl);
  }

  Elem tag(Elem e) const {
    e.ctx = impl_->fingerprint;
    return e;
  }

  void collect_lattice(int axis, int budget, std::vector<int>& v, std::vector<Elem>& out) const {
    if (axis == impl_->rank) {
      out.push_back(tag(Elem{v}));
      return;
    }
    for (int c = -budget; c <= budget; ++c) {
      v[axis] = c;
      collect_lattice(axis + 1, budget - std::abs(c), v, out);
    }
    v[axis] = 0;
  }

  std::shared_ptr<const Impl> impl_;
};

/// Number of elements of word length <= radius in the free group of the given rank.
inline long long free_ball_size(int rank, int radius) {
  long long total = 1;
  long long layer = 2LL * rank;
  for (int k = 1; k <= radius; ++k) {
    total += layer;
    layer *= 2LL * rank - 1;
  }
  return total;
}

/// Validates that a finite set of elements is a subgroup (contains e, closed
/// under products and inverses).
inline bool is_subgroup(const Group& g, const std::vector<Elem>& h) {
  std::set<Elem> s(h.begin(), h.end());
  if (!s.count(g.id())) return false;
  for (const auto& a : s) {
    if (!s.count(g.inv(a))) return false;
    for (const auto& b : s)
      if (!s.count(g.mul(a, b))) return false;
  }
  return true;
}

}  // namespace fellap
