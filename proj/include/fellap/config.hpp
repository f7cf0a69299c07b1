#pragma once

// JSON configuration documents naming groups, algebras, partial actions,
// twists, bundles and witness families. The grammar is documented in
// README.md. Every reference is resolved when the document is loaded;
// structural validation (partial-action and twist axioms) is left to the
// caller so that invalid objects can still be reported on.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fellap/ap.hpp"
#include "fellap/fellbundle.hpp"
#include "fellap/random.hpp"

namespace fellap {

using Json = nlohmann::json;

namespace config_detail {

inline double number(const Json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == s.size() && used > 0) return d;
  }
  throw ConfigError(where + ": expected a number or a decimal string");
}

inline int integer(const Json& v, const std::string& where) {
  const double d = number(v, where);
  if (d != static_cast<double>(static_cast<int>(d))) throw ConfigError(where + ": expected an integer");
  return static_cast<int>(d);
}

/// A number, a decimal string, or [re, im].
inline Complex complex_value(const Json& v, const std::string& where) {
  if (v.is_array()) {
    if (v.size() != 2) throw ConfigError(where + ": complex values are [re, im]");
    return {number(v[0], where), number(v[1], where)};
  }
  return {number(v, where), 0.0};
}

inline Matrix matrix(const Json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a nonempty list of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  const auto cols = static_cast<Eigen::Index>(v[0].is_array() ? v[0].size() : 0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ConfigError(where + ": rows must have equal length");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_value(row[static_cast<std::size_t>(c)], where);
  }
  return m;
}

/// One matrix per block.
inline FdElement element(const FdAlgebra& a, const Json& v, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != a.block_count())
    throw ConfigError(where + ": expected one matrix per block of " + a.describe());
  FdElement x;
  for (int j = 0; j < a.block_count(); ++j) {
    x.blocks.push_back(matrix(v[static_cast<std::size_t>(j)], where));
    if (x.blocks.back().rows() != a.block_dim(j) || x.blocks.back().cols() != a.block_dim(j))
      throw ConfigError(where + ": block " + std::to_string(j) + " has the wrong size");
  }
  return x;
}

inline std::vector<int> int_list(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected a list of integers");
  std::vector<int> out;
  for (const auto& x : v) out.push_back(integer(x, where));
  return out;
}

inline const Json& field(const Json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

inline std::string text(const Json& obj, const std::string& key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (!v.is_string()) throw ConfigError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace config_detail

/// Partial-action-like family with optional twist; a bundle refers to one of these.
struct ActionEntry {
  CPartialAction action;
  std::optional<Twist> twist;
};

struct BundleEntry {
  FellBundle bundle;
  /// Structural source: the action ref, twist ref, or empty for group bundles.
  std::string source;
  std::string kind;
};

class Config {
 public:
  static Config parse(const std::string& text) {
    Json doc;
    try {
      doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> sections{"groups", "algebras", "actions", "twists", "bundles", "witnesses"};
    for (auto it = doc.begin(); it != doc.end(); ++it)
      if (std::find(sections.begin(), sections.end(), it.key()) == sections.end())
        throw ConfigError("unknown config section '" + it.key() + "'");
    Config c;
    c.hash_ = config_detail::hex64(fnv1a(text.data(), text.size()));
    c.load(doc);
    return c;
  }

  static Config load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  const std::string& hash() const { return hash_; }

  const Group& group(const std::string& ref) const { return lookup(groups_, ref, "group"); }
  const FdAlgebra& algebra(const std::string& ref) const { return lookup(algebras_, ref, "algebra"); }
  const CPartialAction& action(const std::string& ref) const { return lookup(actions_, ref, "action"); }
  const ActionEntry& twist(const std::string& ref) const { return lookup(twists_, ref, "twist"); }
  const BundleEntry& bundle(const std::string& ref) const { return lookup(bundles_, ref, "bundle"); }
  const std::pair<std::string, std::vector<APWitness>>& witnesses(const std::string& ref) const {
    return lookup(witnesses_, ref, "witness family");
  }

  /// Section holding ref, or empty.
  std::string kind_of(const std::string& ref) const {
    if (groups_.count(ref)) return "group";
    if (algebras_.count(ref)) return "algebra";
    if (actions_.count(ref)) return "action";
    if (twists_.count(ref)) return "twist";
    if (bundles_.count(ref)) return "bundle";
    if (witnesses_.count(ref)) return "witness";
    return {};
  }

  const Json& document() const { return doc_; }

 private:
  template <typename M>
  static const typename M::mapped_type& lookup(const M& m, const std::string& ref, const std::string& what) {
    auto it = m.find(ref);
    if (it == m.end()) throw ConfigError("unknown " + what + " reference '" + ref + "'");
    return it->second;
  }

  Elem elem(const Group& g, const Json& v, const std::string& where) const {
    if (!v.is_string()) throw ConfigError(where + ": group elements are strings");
    try {
      return g.parse(v.get<std::string>());
    } catch (const Error& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }

  void load(const Json& doc) {
    using namespace config_detail;
    doc_ = doc;
    auto section = [&](const char* name) -> const Json& {
      static const Json empty = Json::object();
      if (!doc.contains(name)) return empty;
      if (!doc.at(name).is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
      return doc.at(name);
    };

    // Products refer to other groups; resolve in dependency order.
    const Json& grps = section("groups");
    std::set<std::string> open;
    std::function<void(const std::string&)> need_group = [&](const std::string& name) {
      if (groups_.count(name)) return;
      if (!grps.contains(name)) throw ConfigError("unknown group reference '" + name + "'");
      if (!open.insert(name).second) throw ConfigError("group '" + name + "' refers to itself");
      const Json& v = grps.at(name);
      if (v.is_object() && v.contains("factors") && v.at("factors").is_array())
        for (const auto& f : v.at("factors"))
          if (f.is_string()) need_group(f.get<std::string>());
      groups_.emplace(name, make_group(name, v));
    };
    for (const auto& [name, v] : grps.items()) need_group(name);
    for (const auto& [name, v] : section("algebras").items()) {
      const std::string where = "algebra '" + name + "'";
      try {
        algebras_.emplace(name, FdAlgebra(int_list(field(v, "blocks", where), where)));
      } catch (const ShapeMismatch& e) {
        throw ConfigError(where + ": " + e.what());
      }
    }
    // Actions may restrict other actions; resolve in dependency order.
    const Json& acts = section("actions");
    std::set<std::string> visiting;
    std::function<void(const std::string&)> resolve = [&](const std::string& name) {
      if (actions_.count(name)) return;
      if (!acts.contains(name)) throw ConfigError("unknown action reference '" + name + "'");
      if (!visiting.insert(name).second) throw ConfigError("action '" + name + "' refers to itself");
      const Json& v = acts.at(name);
      if (v.is_object() && v.contains("action") && v.at("action").is_string()) resolve(v.at("action").get<std::string>());
      actions_.emplace(name, make_action(name, v));
    };
    for (const auto& [name, v] : acts.items()) resolve(name);
    for (const auto& [name, v] : section("twists").items()) twists_.emplace(name, make_twist(name, v));
    for (const auto& [name, v] : section("bundles").items()) bundles_.emplace(name, make_bundle(name, v));
    for (const auto& [name, v] : section("witnesses").items()) witnesses_.emplace(name, make_witnesses(name, v));
  }

  Group make_group(const std::string& name, const Json& v) const {
    using namespace config_detail;
    const std::string where = "group '" + name + "'";
    const std::string kind = text(v, "kind", where);
    try {
      if (kind == "cyclic") return Group::cyclic(integer(field(v, "order", where), where));
      if (kind == "symmetric") return Group::symmetric(integer(field(v, "n", where), where));
      if (kind == "free") return Group::free(integer(field(v, "rank", where), where));
      if (kind == "lattice") return Group::lattice(integer(field(v, "dim", where), where));
      if (kind == "finite") {
        std::vector<std::vector<int>> table;
        for (const auto& row : field(v, "table", where)) table.push_back(int_list(row, where));
        return Group::finite(std::move(table), name);
      }
      if (kind == "product") {
        const Json& f = field(v, "factors", where);
        if (!f.is_array() || f.size() != 2) throw ConfigError(where + ": product needs two factors");
        return Group::product(lookup(groups_, f[0].get<std::string>(), "group"),
                              lookup(groups_, f[1].get<std::string>(), "group"));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(where + ": " + e.what());
    }
    throw ConfigError(where + ": unknown kind '" + kind + "'");
  }

  IdealIso make_iso(const FdAlgebra& a, const Json& v, const std::string& where) const {
    using namespace config_detail;
    const std::vector<int> src = int_list(field(v, "source", where), where);
    const std::vector<int> dst = int_list(field(v, "image", where), where);
    std::vector<Matrix> us;
    if (v.contains("unitaries")) {
      for (const auto& u : v.at("unitaries")) us.push_back(matrix(u, where));
    } else {
      for (int j : src) {
        if (j < 0 || j >= a.block_count()) throw ConfigError(where + ": block index out of range");
        us.push_back(Matrix::Identity(a.block_dim(j), a.block_dim(j)));
      }
    }
    try {
      return IdealIso::make(a, src, dst, us);
    } catch (const Error& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }

  CPartialAction make_action(const std::string& name, const Json& v) const {
    using namespace config_detail;
    const std::string where = "action '" + name + "'";
    const std::string kind = text(v, "kind", where);
    if (kind == "restrict") {
      const CPartialAction& base = lookup(actions_, text(v, "action", where), "action");
      const Ideal ideal(int_list(field(v, "ideal", where), where));
      for (int b : ideal.blocks)
        if (b < 0 || b >= base.algebra().block_count()) throw ConfigError(where + ": ideal block out of range");
      return restrict(base, ideal);
    }
    const Group& g = lookup(groups_, text(v, "group", where), "group");
    if (kind == "trivial") return CPartialAction::trivial(g);
    if (kind == "random") {
      Rng rng(static_cast<std::uint64_t>(v.contains("seed") ? integer(v.at("seed"), where) : 0));
      const bool partial = !v.contains("partial") || v.at("partial").get<bool>();
      return partial ? random_partial_action(g, rng) : random_action(g, rng);
    }
    const FdAlgebra& a = lookup(algebras_, text(v, "algebra", where), "algebra");
    if (kind == "identity") return CPartialAction::identity_action(g, a);
    if (kind == "table") {
      std::map<Elem, IdealIso> table;
      for (const auto& entry : field(v, "entries", where)) {
        const Elem t = elem(g, field(entry, "t", where), where);
        if (!table.emplace(t, make_iso(a, entry, where + " at t=" + g.format(t))).second)
          throw ConfigError(where + ": t=" + g.format(t) + " listed twice");
      }
      if (!table.count(g.id())) table.emplace(g.id(), IdealIso::identity(a));
      return CPartialAction::from_table(g, a, std::move(table));
    }
    if (kind == "generators") {
      std::vector<IdealIso> gens;
      for (const auto& entry : field(v, "generators", where)) gens.push_back(make_iso(a, entry, where));
      try {
        return CPartialAction::from_generators(g, a, std::move(gens));
      } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
      }
    }
    throw ConfigError(where + ": unknown kind '" + kind + "'");
  }

  ActionEntry make_twist(const std::string& name, const Json& v) const {
    using namespace config_detail;
    const std::string where = "twist '" + name + "'";
    const std::string kind = text(v, "kind", where);
    const CPartialAction& gamma = lookup(actions_, text(v, "action", where), "action");
    if (kind == "trivial") return {gamma, Twist::trivial(gamma)};
    if (kind == "perturbed") {
      const auto seed = static_cast<std::uint64_t>(v.contains("seed") ? integer(v.at("seed"), where) : 0);
      auto [family, omega] = perturb_by_unitaries(gamma, random_unitary_family(gamma, seed));
      return {family, omega};
    }
    if (kind == "table") {
      const Group& g = gamma.group();
      std::map<std::pair<Elem, Elem>, FdElement> table;
      for (const auto& entry : field(v, "entries", where)) {
        const Elem r = elem(g, field(entry, "r", where), where);
        const Elem s = elem(g, field(entry, "s", where), where);
        table[{r, s}] = element(gamma.algebra(), field(entry, "value", where), where);
      }
      return {gamma, Twist::from_table(gamma, std::move(table))};
    }
    throw ConfigError(where + ": unknown kind '" + kind + "'");
  }

  BundleEntry make_bundle(const std::string& name, const Json& v) const {
    using namespace config_detail;
    const std::string where = "bundle '" + name + "'";
    const std::string kind = text(v, "kind", where);
    if (kind == "semidirect") {
      const std::string ref = text(v, "action", where);
      return {FellBundle(std::make_shared<SemidirectModel>(lookup(actions_, ref, "action"))), ref, kind};
    }
    if (kind == "twisted") {
      const std::string ref = text(v, "twist", where);
      const ActionEntry& t = lookup(twists_, ref, "twist");
      return {FellBundle(std::make_shared<TwistedModel>(t.action, *t.twist)), ref, kind};
    }
    if (kind == "group") {
      return {make_group_bundle(lookup(groups_, text(v, "group", where), "group"),
                                lookup(algebras_, text(v, "algebra", where), "algebra")),
              "", kind};
    }
    throw ConfigError(where + ": unknown kind '" + kind + "'");
  }

  std::pair<std::string, std::vector<APWitness>> make_witnesses(const std::string& name, const Json& v) const {
    using namespace config_detail;
    const std::string where = "witness family '" + name + "'";
    const std::string ref = text(v, "bundle", where);
    const FellBundle& b = lookup(bundles_, ref, "bundle").bundle;
    const std::string kind = text(v, "kind", where);
    std::vector<APWitness> family;
    try {
      if (kind == "uniform") {
        family.push_back(uniform_witness(b.group(), b.unit_algebra()));
      } else if (kind == "folner") {
        for (int n : int_list(field(v, "sizes", where), where))
          family.push_back(folner_witness(b.group(), b.unit_algebra(), n));
      } else if (kind == "table") {
        for (const auto& member : field(v, "members", where)) {
          APWitness w(b);
          for (const auto& entry : member)
            w.set(elem(b.group(), field(entry, "r", where), where),
                  element(b.unit_algebra(), field(entry, "value", where), where));
          family.push_back(std::move(w));
        }
      } else {
        throw ConfigError(where + ": unknown kind '" + kind + "'");
      }
    } catch (const Unsupported& e) {
      throw ConfigError(where + ": " + e.what());
    }
    if (family.empty()) throw ConfigError(where + ": empty family");
    return {ref, std::move(family)};
  }

  std::string hash_;
  Json doc_;
  std::map<std::string, Group> groups_;
  std::map<std::string, FdAlgebra> algebras_;
  std::map<std::string, CPartialAction> actions_;
  std::map<std::string, ActionEntry> twists_;
  std::map<std::string, BundleEntry> bundles_;
  std::map<std::string, std::pair<std::string, std::vector<APWitness>>> witnesses_;
};

}  // namespace fellap
