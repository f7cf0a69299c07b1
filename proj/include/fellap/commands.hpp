#pragma once

// Batch commands behind the fellap CLI. Each command writes a CSV table to
// `out`, a human-readable summary to `err`, and returns the process exit code.

#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fellap/ap.hpp"
#include "fellap/cantor.hpp"
#include "fellap/config.hpp"
#include "fellap/csv.hpp"
#include "fellap/globalize.hpp"
#include "fellap/kernels.hpp"

namespace fellap {

enum ExitCode : int { exit_pass = 0, exit_validation = 1, exit_config = 2, exit_unsupported = 3 };

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  double tol = 1e-10;
};

namespace cmd_detail {

inline std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(what + ": '" + s + "' is not an integer");
}

inline Config load(const CommonOptions& opt) {
  if (opt.config_path.empty()) throw ConfigError("--config is required");
  return Config::load_file(opt.config_path);
}

inline std::string seed_str(const CommonOptions& opt) { return std::to_string(opt.seed); }

}  // namespace cmd_detail

/// Runs the validator matching the kind of `target` (action, twist or bundle).
inline int cmd_validate(const CommonOptions& opt, const std::string& target, int radius, int samples,
                        std::ostream& out, std::ostream& err) {
  const Config cfg = cmd_detail::load(opt);
  const std::string kind = cfg.kind_of(target);
  Report rep(opt.tol);
  if (kind == "action") {
    rep = validate_partial_action(cfg.action(target), radius, opt.tol);
  } else if (kind == "twist") {
    const ActionEntry& t = cfg.twist(target);
    rep = validate_twisted(t.action, *t.twist, radius, opt.seed, opt.tol);
  } else if (kind == "bundle") {
    rep = validate_bundle(cfg.bundle(target).bundle, radius, samples, opt.seed, opt.tol);
  } else if (kind.empty()) {
    throw ConfigError("unknown reference '" + target + "'");
  } else {
    throw ConfigError("'" + target + "' is a " + kind + "; validate takes an action, twist or bundle");
  }
  CsvWriter csv(out, {"config", "seed", "target", "kind", "radius", "check", "evaluations", "max_residual",
                      "worst_witness", "status"});
  for (const auto& c : rep.checks())
    csv.row({cfg.hash(), cmd_detail::seed_str(opt), target, kind, std::to_string(radius), c.check,
             std::to_string(c.evaluations), fmt_num(c.max_residual), c.worst_witness,
             c.max_residual <= opt.tol ? "pass" : "fail"});
  err << "validate " << target << " (" << kind << ", radius " << radius << "): " << rep.summary() << '\n';
  if (!rep.ok()) {
    std::vector<std::string> failing;
    for (const auto& c : rep.checks())
      if (!(c.max_residual <= opt.tol)) failing.push_back(c.check);
    err << "failing checks:";
    for (const auto& f : failing) err << ' ' << f << ';';
    err << '\n';
  }
  return rep.ok() ? exit_pass : exit_validation;
}

namespace cmd_detail {

/// Name of the group an action entry is declared over, following restrictions.
inline std::string action_group_ref(const Json& doc, std::string ref) {
  for (int guard = 0; guard < 64; ++guard) {
    const Json& v = doc.at("actions").at(ref);
    if (v.contains("group")) return v.at("group").get<std::string>();
    ref = v.at("action").get<std::string>();
  }
  throw ConfigError("action '" + ref + "' has no group");
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      // Clean rounding noise so the written config is stable.
      auto clean = [](double x) { return std::abs(x) < 1e-14 ? 0.0 : x; };
      row.push_back(Json::array({fmt_num(clean(m(r, c).real())), fmt_num(clean(m(r, c).imag()))}));
    }
    rows.push_back(row);
  }
  return rows;
}

inline std::string unused_name(const Json& section, const std::string& base) {
  std::string name = base;
  for (int k = 2; section.contains(name); ++k) name = base + "_" + std::to_string(k);
  return name;
}

}  // namespace cmd_detail

/// Builds the enveloping action of a finite-group partial action and checks
/// that restricting it to iota(A) gives the input back. With config_out set,
/// writes the input config plus the enveloping algebra and global action.
inline int cmd_globalize(const CommonOptions& opt, const std::string& action_ref, const std::string& config_out,
                         std::ostream& out, std::ostream& err) {
  const Config cfg = cmd_detail::load(opt);
  const CPartialAction& pa = cfg.action(action_ref);
  const Group& g = pa.group();
  if (!g.is_finite()) throw Unsupported("globalize needs a finite group; " + g.name() + " is infinite");
  const Globalization glob = globalize_finite(pa);
  const Ideal& image = glob.image();
  const double round_trip = action_distance(restrict(glob.action(), image), pa, g.elements());
  const auto span = glob.orbit_span_check();
  const bool ok = round_trip <= opt.tol && span.equal();

  CsvWriter csv(out, {"config", "seed", "action", "row", "t", "source", "image", "value"});
  const std::string h = cfg.hash();
  const std::string seed = cmd_detail::seed_str(opt);
  const FdAlgebra& n = glob.enveloping();
  for (int b = 0; b < n.block_count(); ++b)
    csv.row({h, seed, action_ref, "N-block", "", std::to_string(b), "", std::to_string(n.block_dim(b))});
  csv.row({h, seed, action_ref, "iota", "", cmd_detail::join_ints(Ideal::whole(pa.algebra()).blocks),
           cmd_detail::join_ints(image.blocks), ""});
  for (const auto& t : g.elements()) {
    const IdealIso& f = glob.action().iso(t);
    csv.row({h, seed, action_ref, "sigma", g.format(t), cmd_detail::join_ints(f.source.blocks),
             cmd_detail::join_ints(f.image), ""});
  }
  csv.row({h, seed, action_ref, "round-trip", "", "", "", fmt_num(round_trip)});
  csv.row({h, seed, action_ref, "orbit-span", "", std::to_string(span.orbit_rank) + " " + std::to_string(span.joint_rank),
           std::to_string(span.n_dim), span.equal() ? "equal" : "unequal"});

  err << "globalize " << action_ref << ": N has " << n.block_count() << " blocks (" << n.describe()
      << "), round-trip residual " << fmt_num(round_trip) << ", orbit span "
      << (span.equal() ? "equals N" : "does not equal N") << '\n';

  if (!config_out.empty()) {
    Json doc = cfg.document();
    if (!doc.contains("algebras")) doc["algebras"] = Json::object();
    const std::string alg = cmd_detail::unused_name(doc["algebras"], action_ref + "_envelope");
    Json blocks = Json::array();
    for (int b = 0; b < n.block_count(); ++b) blocks.push_back(n.block_dim(b));
    doc["algebras"][alg] = {{"blocks", blocks}};
    const std::string act = cmd_detail::unused_name(doc["actions"], action_ref + "_global");
    Json entries = Json::array();
    for (const auto& t : g.elements()) {
      const IdealIso& f = glob.action().iso(t);
      Json us = Json::array();
      for (const auto& u : f.unitaries) us.push_back(cmd_detail::matrix_json(u));
      entries.push_back({{"t", g.format(t)}, {"source", f.source.blocks}, {"image", f.image}, {"unitaries", us}});
    }
    doc["actions"][act] = {{"kind", "table"},
                           {"group", cmd_detail::action_group_ref(cfg.document(), action_ref)},
                           {"algebra", alg},
                           {"entries", entries}};
    std::ofstream file(config_out, std::ios::binary);
    if (!file) throw ConfigError("cannot write " + config_out);
    file << doc.dump(2) << '\n';
    err << "wrote global action '" << act << "' on algebra '" << alg << "' to " << config_out << '\n';
  }
  return ok ? exit_pass : exit_validation;
}

struct APCheckOptions {
  std::string bundle;
  std::string witness;
  std::string targets = "basis";
  int n = 2;
  double cap = std::numeric_limits<double>::infinity();
};

namespace cmd_detail {

inline std::vector<APTarget> parse_targets(const FellBundle& b, const std::string& spec) {
  if (spec == "basis") return basis_targets(b, 1);
  if (spec.rfind("basis:", 0) == 0) return basis_targets(b, parse_int(spec.substr(6), "--targets"));
  // Semicolon-separated "t" (every basis vector of B_t) or "t#i".
  std::vector<APTarget> out;
  const Group& g = b.group();
  for (const auto& item : split(spec, ';')) {
    const auto hash = item.find('#');
    Elem t;
    try {
      t = g.parse(item.substr(0, hash));
    } catch (const Error& e) {
      throw ConfigError(std::string("--targets: ") + e.what());
    }
    const int d = b.dim(t);
    if (hash == std::string::npos) {
      for (int i = 0; i < d; ++i) out.push_back({t, Vector::Unit(d, i), g.format(t) + "#" + std::to_string(i)});
    } else {
      const int i = parse_int(item.substr(hash + 1), "--targets");
      if (i < 0 || i >= d) throw ConfigError("--targets: fiber over " + g.format(t) + " has dimension " + std::to_string(d));
      out.push_back({t, Vector::Unit(d, i), g.format(t) + "#" + std::to_string(i)});
    }
  }
  if (out.empty()) throw ConfigError("--targets selects nothing");
  return out;
}

inline std::vector<Elem> parse_words(const Group& fn, const std::string& spec) {
  std::vector<Elem> out;
  for (const auto& item : split(spec, ';')) {
    for (const auto& w : split(item, ',')) {
      try {
        out.push_back(fn.parse(w));
      } catch (const Error& e) {
        throw ConfigError(std::string("--targets: ") + e.what());
      }
    }
  }
  if (out.empty()) throw ConfigError("--targets selects nothing");
  return out;
}

}  // namespace cmd_detail

/// Defect table for a witness family. builtin:folner:N and builtin:cuntz:i
/// expand to the families 1..N and 1..i; the family passes when every target's
/// defect at the last index is <= tol and every bound is <= cap.
inline int cmd_ap_check(const CommonOptions& opt, const APCheckOptions& ap, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> header{"config", "seed", "bundle", "witness", "index", "t", "target", "bound", "defect"};
  const std::string seed = cmd_detail::seed_str(opt);
  if (ap.witness.rfind("builtin:cuntz:", 0) == 0) {
    const int imax = cmd_detail::parse_int(ap.witness.substr(14), "--witness");
    if (imax < 1 || ap.n < 2) throw ConfigError("builtin:cuntz needs i >= 1 and --n >= 2");
    const Group fn = Group::free(ap.n);
    const auto targets = cmd_detail::parse_words(fn, ap.targets == "basis" ? "a" : ap.targets);
    std::vector<int> idx;
    for (int i = 1; i <= imax; ++i) idx.push_back(i);
    std::vector<std::string> labels;
    for (const auto& g : targets) labels.push_back(fn.format(g));
    std::vector<CuntzWitness> xi;
    for (int i = 1; i <= imax; ++i) xi.push_back(xi_witness(i, ap.n));
    const APVerdict v = ap_certify(
        idx, [&](int i) { return witness_bound(xi[i - 1]); }, labels,
        [&](int i, std::size_t j) { return cuntz_ap_defect(xi[i - 1], targets[j]); }, opt.tol, ap.cap);
    CsvWriter csv(out, header);
    const std::string bundle = "cuntz:n=" + std::to_string(ap.n);
    for (const auto& r : v.rows)
      csv.row({"-", seed, bundle, ap.witness, std::to_string(r.index), r.target, "1_" + r.target, fmt_num(r.bound),
               fmt_num(r.defect)});
    err << "ap-check " << ap.witness << " on " << bundle << ": " << (v.pass() ? "pass" : "FAIL") << " ("
        << v.failing.size() << " targets above tol at i=" << imax << ")\n";
    return v.pass() ? exit_pass : exit_validation;
  }

  const Config cfg = cmd_detail::load(opt);
  if (ap.bundle.empty()) throw ConfigError("--bundle is required");
  const FellBundle& b = cfg.bundle(ap.bundle).bundle;
  std::vector<APWitness> family;
  if (ap.witness == "builtin:uniform") {
    family.push_back(uniform_witness(b.group(), b.unit_algebra()));
  } else if (ap.witness.rfind("builtin:folner:", 0) == 0) {
    const int nmax = cmd_detail::parse_int(ap.witness.substr(15), "--witness");
    if (nmax < 1) throw ConfigError("builtin:folner needs N >= 1");
    for (int k = 1; k <= nmax; ++k) family.push_back(folner_witness(b.group(), b.unit_algebra(), k));
  } else if (ap.witness.rfind("builtin:", 0) == 0) {
    throw ConfigError("unknown builtin witness '" + ap.witness + "'");
  } else {
    const auto& [ref, members] = cfg.witnesses(ap.witness);
    if (ref != ap.bundle) throw ConfigError("witness family '" + ap.witness + "' belongs to bundle '" + ref + "'");
    family = members;
  }
  for (const auto& w : family) w.check_bundle(b);
  const auto targets = cmd_detail::parse_targets(b, ap.targets);
  const APVerdict v = ap_certify(b, family, targets, opt.tol, ap.cap);
  CsvWriter csv(out, header);
  std::size_t k = 0;
  for (const auto& r : v.rows) {
    const APTarget& tg = targets[k++ % targets.size()];
    csv.row({cfg.hash(), seed, ap.bundle, ap.witness, std::to_string(r.index), b.group().format(tg.t), r.target,
             fmt_num(r.bound), fmt_num(r.defect)});
  }
  double last = 0.0;
  for (std::size_t j = v.rows.size() - targets.size(); j < v.rows.size(); ++j) last = std::max(last, v.rows[j].defect);
  err << "ap-check " << ap.witness << " on " << ap.bundle << ": " << (v.pass() ? "pass" : "FAIL") << " (max defect "
      << fmt_num(last) << " at index " << family.size() << ", " << v.failing.size() << " targets above tol, "
      << v.over_cap.size() << " indices over cap)\n";
  return v.pass() ? exit_pass : exit_validation;
}

/// Window sizes, dim M_F, sampled norms and beta residuals for radii 0..window.
inline int cmd_kernels(const CommonOptions& opt, const std::string& bundle_ref, int window, int samples,
                       std::ostream& out, std::ostream& err) {
  const Config cfg = cmd_detail::load(opt);
  const FellBundle& b = cfg.bundle(bundle_ref).bundle;
  const Group& g = b.group();
  Rng rng(opt.seed);
  CsvWriter csv(out, {"config", "seed", "bundle", "radius", "sample", "window_size", "dim_MF", "s", "t", "norm2",
                      "mf_norm", "beta_hom_residual", "beta_star_residual", "beta_action_residual"});
  double worst = 0.0;
  for (int r = 0; r <= window; ++r) {
    const WindowF f = WindowF::ball(g, r);
    const long dim = mf_dimension(b, f);
    const auto& elems = f.elements();
    std::uniform_int_distribution<std::size_t> pick(0, elems.size() - 1);
    for (int k = 0; k < samples; ++k) {
      const Kernel h = random_kernel(b, f, rng);
      const Kernel x = random_kernel(b, f, rng);
      const Elem s = elems[pick(rng)];
      const Elem t = elems[pick(rng)];
      const double hom = kernel_distance(beta_act(t, k_mul(h, x)), k_mul(beta_act(t, h), beta_act(t, x)));
      const double star = kernel_distance(beta_act(t, k_star(h)), k_star(beta_act(t, h)));
      const double act = kernel_distance(beta_act(s, beta_act(t, h)), beta_act(g.mul(s, t), h));
      worst = std::max({worst, hom, star, act});
      csv.row({cfg.hash(), cmd_detail::seed_str(opt), bundle_ref, std::to_string(r), std::to_string(k),
               std::to_string(f.size()), std::to_string(dim), g.format(s), g.format(t), fmt_num(norm2(h)),
               fmt_num(MF_embed_norm(h, f)), fmt_num(hom), fmt_num(star), fmt_num(act)});
    }
  }
  const bool ok = worst <= opt.tol;
  err << "kernels " << bundle_ref << ": radii 0.." << window << ", " << samples << " samples each, max beta residual "
      << fmt_num(worst) << (ok ? "" : " (above tol)") << '\n';
  return ok ? exit_pass : exit_validation;
}

/// Defect of xi_i at 1_{X_g} for i = 1..imax against the closed form.
inline int cmd_cuntz_ap(const CommonOptions& opt, int n, int imax, const std::string& targets, bool include_identity,
                        std::ostream& out, std::ostream& err) {
  if (n < 2 || imax < 1) throw ConfigError("cuntz-ap needs --n >= 2 and --imax >= 1");
  const Group fn = Group::free(n);
  const auto gs = cmd_detail::parse_words(fn, targets);
  CsvWriter csv(out, {"seed", "n", "include_identity", "i", "target", "defect", "predicted", "residual"});
  double worst = 0.0;
  for (int i = 1; i <= imax; ++i) {
    const CuntzWitness xi = xi_witness(i, n, include_identity);
    for (const auto& g : gs) {
      const double d = cuntz_ap_defect(xi, g);
      const auto p = cuntz_predicted_defect(i, fn, g, include_identity);
      const double res = p ? std::abs(d - *p) : 0.0;
      if (p) worst = std::max(worst, res);
      csv.row({cmd_detail::seed_str(opt), std::to_string(n), include_identity ? "1" : "0", std::to_string(i),
               fn.format(g), fmt_num(d), p ? fmt_num(*p) : "", p ? fmt_num(res) : ""});
    }
  }
  const bool ok = worst <= opt.tol;
  err << "cuntz-ap n=" << n << " i=1.." << imax << ": max residual against the closed form " << fmt_num(worst)
      << (ok ? "" : " (above tol)") << '\n';
  return ok ? exit_pass : exit_validation;
}

/// Arrows of the truncated spectral groupoid and its axiom check.
inline int cmd_groupoid(const CommonOptions& opt, int n, int depth, int radius, std::ostream& out, std::ostream& err) {
  if (n < 2) throw ConfigError("groupoid needs --n >= 2");
  const SpectralGroupoid gr(n, depth, radius);
  const Report rep = check_groupoid(gr);
  CsvWriter csv(out, {"seed", "n", "depth", "radius", "arrow", "x", "g", "range", "is_unit"});
  const auto& arrows = gr.arrows();
  for (std::size_t k = 0; k < arrows.size(); ++k)
    csv.row({cmd_detail::seed_str(opt), std::to_string(n), std::to_string(depth), std::to_string(radius),
             std::to_string(k), format_word(arrows[k].x), gr.group().format(arrows[k].g), format_word(gr.range(arrows[k])),
             gr.is_unit(arrows[k]) ? "1" : "0"});
  err << "groupoid n=" << n << " depth=" << depth << " radius=" << radius << ": " << arrows.size()
      << " arrows, axioms " << rep.summary() << '\n';
  return rep.ok() ? exit_pass : exit_validation;
}

}  // namespace fellap
