#include "pskyline/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <fmt/core.h>

namespace pskyline {

void check_rule(const dd_rule& r, size_t d) {
  if (r.determinants.empty()) throw std::invalid_argument("rule without determinants");
  if (r.determinants.size() != r.det_eps.size()) throw std::invalid_argument("rule tolerance count mismatch");
  if (r.dependent >= d) throw dimension_error("rule dependent outside the schema");
  std::set<size_t> seen;
  for (size_t i = 0; i < r.determinants.size(); ++i) {
    if (r.determinants[i] >= d) throw dimension_error("rule determinant outside the schema");
    if (r.determinants[i] == r.dependent) throw std::invalid_argument("rule dependent among its determinants");
    if (!seen.insert(r.determinants[i]).second) throw std::invalid_argument("repeated determinant");
    if (!(r.det_eps[i] >= 0.0)) throw std::invalid_argument("negative tolerance");
  }
  if (!(r.dep_eps >= 0.0)) throw std::invalid_argument("negative tolerance");
}

static std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<dd_rule> parse_dd_rules(std::istream& in, const std::vector<std::string>& header) {
  std::vector<dd_rule> rules;
  std::string line;
  size_t no = 0;
  auto attr = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::invalid_argument(fmt::format("line {}: unknown attribute '{}'", no, name));
    return static_cast<size_t>(it - header.begin());
  };
  while (std::getline(in, line)) {
    ++no;
    std::string s;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty() || s[0] == '#') continue;
    auto arrow = s.find("->");
    auto colon = s.find(':');
    if (arrow == std::string::npos || colon == std::string::npos || colon < arrow)
      throw std::invalid_argument(fmt::format("line {}: expected 'X1,X2->Aj : eps...'", no));
    dd_rule r;
    for (const auto& name : split(s.substr(0, arrow), ',')) r.determinants.push_back(attr(name));
    r.dependent = attr(s.substr(arrow + 2, colon - arrow - 2));
    auto eps = split(s.substr(colon + 1), ',');
    if (eps.size() != r.determinants.size() + 1)
      throw std::invalid_argument(fmt::format("line {}: {} tolerances for {} attributes", no, eps.size(),
                                              r.determinants.size() + 1));
    std::vector<double> vals;
    for (const auto& e : eps) {
      try {
        size_t used = 0;
        vals.push_back(std::stod(e, &used));
        if (used != e.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw std::invalid_argument(fmt::format("line {}: bad tolerance '{}'", no, e));
      }
    }
    r.det_eps.assign(vals.begin(), vals.end() - 1);
    r.dep_eps = vals.back();
    try {
      check_rule(r, header.size());
    } catch (const std::exception& e) {
      throw std::invalid_argument(fmt::format("line {}: {}", no, e.what()));
    }
    rules.push_back(r);
  }
  return rules;
}

std::vector<dd_rule> load_dd_rules(const std::string& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rule file " + path);
  return parse_dd_rules(in, header);
}

std::string format_dd_rule(const dd_rule& r, const std::vector<std::string>& header) {
  std::string lhs, eps;
  for (size_t i = 0; i < r.determinants.size(); ++i) {
    lhs += (i ? "," : "") + header.at(r.determinants[i]);
    eps += fmt::format("{}{}", i ? "," : "", r.det_eps[i]);
  }
  return fmt::format("{}->{} : {},{}", lhs, header.at(r.dependent), eps, r.dep_eps);
}

lattice build_lattice(const std::vector<dd_rule>& rules) {
  if (rules.empty()) throw std::invalid_argument("lattice needs at least one rule");
  if (rules.size() > 20) throw std::invalid_argument("too many rules for one dependent attribute");
  lattice lat;
  lat.dependent = rules.front().dependent;
  lat.base = rules;
  for (const auto& r : rules)
    if (r.dependent != lat.dependent) throw std::invalid_argument("lattice rules must share the dependent attribute");
  const size_t l = rules.size();
  lat.levels.assign(l + 1, {});
  for (uint64_t mask = 0; mask < (uint64_t{1} << l); ++mask) {
    lattice_node n;
    n.mask = mask;
    std::map<size_t, double> eps;
    n.dep_eps = 0.0;
    bool first = true;
    for (size_t i = 0; i < l; ++i) {
      if (!(mask >> i & 1)) continue;
      ++n.level;
      for (size_t k = 0; k < rules[i].determinants.size(); ++k) {
        auto [it, fresh] = eps.emplace(rules[i].determinants[k], rules[i].det_eps[k]);
        if (!fresh) it->second = std::min(it->second, rules[i].det_eps[k]);
      }
      n.dep_eps = first ? rules[i].dep_eps : std::min(n.dep_eps, rules[i].dep_eps);
      first = false;
    }
    for (auto [a, e] : eps) n.attrs.push_back(a), n.eps.push_back(e);
    lat.levels[n.level].push_back(lat.nodes.size());
    lat.nodes.push_back(std::move(n));
  }
  return lat;
}

void rank_lattice(lattice& lat, const repository_index& index) {
  for (auto& n : lat.nodes) {
    std::vector<std::pair<size_t, double>> tol;
    for (size_t i = 0; i < n.attrs.size(); ++i) tol.emplace_back(n.attrs[i], n.eps[i]);
    n.est = n.attrs.empty() ? static_cast<double>(index.size()) : index.estimate_matches(tol);
  }
  for (auto& level : lat.levels)
    std::stable_sort(level.begin(), level.end(), [&](size_t a, size_t b) {
      const auto& x = lat.nodes[a];
      const auto& y = lat.nodes[b];
      if (x.est != y.est) return x.est < y.est;
      return x.attrs < y.attrs;
    });
}

query_range node_range(const lattice_node& n, const stream_object& o) {
  query_range q;
  for (size_t i = 0; i < n.attrs.size(); ++i) {
    const auto& v = o.attrs.at(n.attrs[i]);
    if (!v) throw std::invalid_argument("determinant attribute missing in object " + o.id);
    q.terms.push_back({n.attrs[i], {*v - n.eps[i], *v + n.eps[i]}});
  }
  return q;
}

static bool usable(const lattice_node& n, const stream_object& o) {
  for (size_t a : n.attrs)
    if (a >= o.attrs.size() || !o.attrs[a]) return false;
  return true;
}

// |s - v| <= eps, the same predicate a linear scan applies
static std::vector<size_t> exact_matches(const lattice_node& n, const stream_object& o,
                                         const std::vector<size_t>& candidates, const repository_index& index) {
  std::vector<size_t> out;
  for (size_t i : candidates) {
    bool ok = true;
    for (size_t k = 0; k < n.attrs.size() && ok; ++k)
      ok = std::fabs(index.sample(i)[n.attrs[k]] - *o.attrs[n.attrs[k]]) <= n.eps[k];
    if (ok) out.push_back(i);
  }
  return out;
}

// widened by an ulp-scale margin so interval rounding never drops a sample
static query_range padded_range(const lattice_node& n, const stream_object& o) {
  auto q = node_range(n, o);
  for (auto& [a, iv] : q.terms) {
    double pad = 1e-12 * std::max(1.0, std::fabs(iv.lo) + std::fabs(iv.hi));
    iv.lo -= pad;
    iv.hi += pad;
  }
  return q;
}

static std::vector<size_t> matches(const lattice_node& n, const stream_object& o, const repository_index& index) {
  return exact_matches(n, o, index.range_query(padded_range(n, o)), index);
}

selection select_dd(const lattice& lat, const stream_object& o, const repository_index& index) {
  selection sel;
  const size_t leaf_depth = index.height();
  for (size_t level = lat.levels.size() - 1; level >= 1; --level) {
    for (size_t idx : lat.levels[level]) {
      const auto& n = lat.nodes[idx];
      if (!usable(n, o)) continue;
      auto b = index.attribute_bounds(padded_range(n, o), leaf_depth);
      if (b.count_hi == 0) continue;
      auto s = matches(n, o, index);
      if (!s.empty()) {
        sel.node = idx;
        sel.samples = std::move(s);
        return sel;
      }
    }
  }
  return sel;
}

imputed_distribution distribution_of(size_t attr, const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("no values to build a distribution from");
  std::map<double, size_t> freq;
  for (double v : values) ++freq[v];
  imputed_distribution d;
  d.attr = attr;
  for (auto [v, c] : freq) d.support.emplace_back(v, static_cast<double>(c) / static_cast<double>(values.size()));
  return d;
}

imputed_distribution impute_attribute(const stream_object& o, const lattice_node& n, const repository_index& index) {
  auto s = matches(n, o, index);
  if (s.empty()) throw std::logic_error("no repository sample inside the selected rule range for " + o.id);
  std::vector<double> vals;
  for (size_t i : s) vals.push_back(index.sample(i)[index.dependent()]);
  return distribution_of(index.dependent(), vals);
}

imputed_distribution fallback_impute(size_t attr, const repository& repo) {
  if (repo.rows.empty()) throw std::invalid_argument("empty repository");
  std::vector<double> vals;
  for (const auto& r : repo.rows) vals.push_back(r.at(attr));
  return distribution_of(attr, vals);
}

prob_object combine_distributions(const stream_object& o, const std::vector<imputed_distribution>& dists) {
  attr_vec base(o.attrs.size(), 0.0);
  for (size_t i = 0; i < o.attrs.size(); ++i)
    if (o.attrs[i]) base[i] = *o.attrs[i];
  std::vector<instance> inst{{base, 1.0}};
  for (const auto& d : dists) {
    if (d.attr >= base.size() || o.attrs[d.attr]) throw std::invalid_argument("distribution for a present attribute");
    std::vector<instance> next;
    next.reserve(inst.size() * d.support.size());
    for (const auto& in : inst)
      for (auto [v, p] : d.support) {
        instance x = in;
        x.attrs[d.attr] = v;
        x.p *= p;
        next.push_back(std::move(x));
      }
    inst.swap(next);
  }
  if (inst.size() > instance_cap) {
    std::stable_sort(inst.begin(), inst.end(), [](const instance& a, const instance& b) {
      if (a.p != b.p) return a.p > b.p;
      return a.attrs < b.attrs;
    });
    inst.resize(instance_cap);
  }
  double mass = 0.0;
  for (const auto& in : inst) mass += in.p;
  for (auto& in : inst) in.p /= mass;
  return make_prob_object(o.id, o.arr, o.exp, std::move(inst));
}

imputer::imputer(repository repo, const std::vector<dd_rule>& rules, double u, size_t lambda)
    : repo_(std::move(repo)) {
  if (repo_.rows.empty()) throw std::invalid_argument("empty repository");
  std::map<size_t, std::vector<dd_rule>> by_dep;
  for (const auto& r : rules) {
    check_rule(r, repo_.dims());
    by_dep[r.dependent].push_back(r);
  }
  for (auto& [dep, rs] : by_dep) {
    lattice lat = build_lattice(rs);
    std::vector<size_t> u_dims = lat.nodes.back().attrs; // full combination is the union
    auto idx = std::make_unique<repository_index>(repo_, u_dims, dep, u, lambda);
    rank_lattice(lat, *idx);
    lattices_.emplace(dep, std::move(lat));
    indexes_.emplace(dep, std::move(idx));
  }
  for (size_t a = 0; a < repo_.dims(); ++a) fallback_.push_back(fallback_impute(a, repo_));
}

const lattice* imputer::lattice_for(size_t attr) const {
  auto it = lattices_.find(attr);
  return it == lattices_.end() ? nullptr : &it->second;
}

const repository_index* imputer::index_for(size_t attr) const {
  auto it = indexes_.find(attr);
  return it == indexes_.end() ? nullptr : it->second.get();
}

imputed_distribution imputer::impute_one(const stream_object& o, size_t attr, size_t* level) const {
  if (level) *level = 0;
  auto lit = lattices_.find(attr);
  if (lit != lattices_.end()) {
    const auto& index = *indexes_.at(attr);
    auto sel = select_dd(lit->second, o, index);
    if (sel.node) {
      if (level) *level = lit->second.nodes[*sel.node].level;
      std::vector<double> vals;
      for (size_t i : sel.samples) vals.push_back(index.sample(i)[attr]);
      return distribution_of(attr, vals);
    }
  }
  return fallback_.at(attr);
}

prob_object imputer::impute(const stream_object& o) const {
  check_stream_object(o, repo_.dims());
  std::vector<imputed_distribution> dists;
  for (size_t a = 0; a < o.attrs.size(); ++a)
    if (!o.attrs[a]) dists.push_back(impute_one(o, a));
  return combine_distributions(o, dists);
}

} // namespace pskyline
