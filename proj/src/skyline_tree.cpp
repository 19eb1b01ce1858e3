#include "pskyline/skyline_tree.hpp"

#include <algorithm>

#include <fmt/core.h>

namespace pskyline {

skyline_tree::skyline_tree(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
}

void skyline_tree::place(int n, size_t layer) {
  if (layers_.size() < layer) layers_.resize(layer);
  nodes_[n].layer = layer;
  layers_[layer - 1].insert(key(n));
}

void skyline_tree::unplace(int n) {
  size_t l = nodes_[n].layer;
  layers_[l - 1].erase(key(n));
  while (!layers_.empty() && layers_.back().empty()) layers_.pop_back();
}

void skyline_tree::set_parent(int n, int p) {
  int old = nodes_[n].parent;
  if (old == p) return;
  if (old >= 0) {
    auto& ch = nodes_[old].children;
    ch.erase(std::remove(ch.begin(), ch.end(), n), ch.end());
  }
  nodes_[n].parent = p;
  if (p >= 0) nodes_[p].children.push_back(n);
}

// layer order, each layer by ascending exp
std::vector<int> skyline_tree::ordered() const {
  std::vector<int> out;
  for (const auto& l : layers_)
    for (const auto& k : l) out.push_back(std::get<2>(k));
  return out;
}

insert_outcome skyline_tree::insert(object_ref o) {
  if (by_id_.count(o->id)) throw std::invalid_argument("object " + o->id + " is already in the tree");
  const double thr = 1.0 - alpha_;
  insert_outcome out;
  std::vector<int> dominators, dominated;
  // any dominator that outlives o settles it before the tree changes
  for (int n : ordered()) {
    const prob_object& x = *nodes_[n].obj;
    if (prob_ge(dominance_probability(x, *o), thr)) {
      if (x.exp >= o->exp) {
        out.status = insert_status::pruned;
        out.pruner = nodes_[n].obj;
        return out;
      }
      dominators.push_back(n);
    }
    if (prob_ge(dominance_probability(*o, x), thr)) dominated.push_back(n);
  }

  int x;
  if (!free_.empty()) {
    x = free_.back();
    free_.pop_back();
    nodes_[x] = node{};
  } else {
    x = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
  }
  nodes_[x].obj = o;
  nodes_[x].seq = seq_++;
  nodes_[x].alive = true;
  by_id_[o->id] = x;
  for (int d : dominators) {
    nodes_[x].in.push_back(d);
    nodes_[d].out.push_back(x);
  }
  place(x, 1);

  std::vector<int> affected{x};
  for (int n : dominated) {
    if (o->exp >= nodes_[n].obj->exp) {
      out.removed.push_back(nodes_[n].obj);
      remove_node(n, affected);
    } else {
      nodes_[x].out.push_back(n);
      nodes_[n].in.push_back(x);
      affected.push_back(n);
    }
  }
  relayer(affected);
  out.status = insert_status::inserted;
  out.layer = nodes_[x].layer;
  return out;
}

void skyline_tree::remove_node(int n, std::vector<int>& affected) {
  node& x = nodes_[n];
  for (int c : x.out) {
    auto& in = nodes_[c].in;
    in.erase(std::remove(in.begin(), in.end(), n), in.end());
    affected.push_back(c);
  }
  for (int p : x.in) {
    auto& o = nodes_[p].out;
    o.erase(std::remove(o.begin(), o.end(), n), o.end());
  }
  for (int c : std::vector<int>(x.children)) set_parent(c, -1);
  set_parent(n, -1);
  unplace(n);
  by_id_.erase(x.obj->id);
  x = node{};
  free_.push_back(n);
}

void skyline_tree::relayer(const std::vector<int>& seeds) {
  // edges always run from earlier to later expiry, so exp order is topological
  std::vector<int> todo;
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<int> stack;
  for (int s : seeds)
    if (nodes_[s].alive) stack.push_back(s);
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    if (seen[n]) continue;
    seen[n] = 1;
    todo.push_back(n);
    for (int c : nodes_[n].out) stack.push_back(c);
  }
  std::sort(todo.begin(), todo.end(), [&](int a, int b) { return key(a) < key(b); });
  for (int n : todo) {
    size_t layer = 1;
    for (int p : nodes_[n].in) layer = std::max(layer, nodes_[p].layer + 1);
    int parent = -1;
    for (int p : nodes_[n].in) {
      if (nodes_[p].layer + 1 != layer) continue;
      if (parent < 0 || nodes_[p].obj->exp > nodes_[parent].obj->exp ||
          (nodes_[p].obj->exp == nodes_[parent].obj->exp && nodes_[p].seq < nodes_[parent].seq))
        parent = p;
    }
    if (layer != nodes_[n].layer) {
      unplace(n);
      place(n, layer);
    }
    set_parent(n, parent);
  }
}

std::vector<object_ref> skyline_tree::delete_expired(int64_t t) {
  std::vector<object_ref> gone;
  std::vector<int> affected, doomed;
  for (int n : ordered())
    if (nodes_[n].obj->exp <= t) doomed.push_back(n);
  for (int n : doomed) {
    gone.push_back(nodes_[n].obj);
    remove_node(n, affected);
  }
  affected.erase(std::remove_if(affected.begin(), affected.end(), [&](int n) { return !nodes_[n].alive; }),
                 affected.end());
  relayer(affected);
  return gone;
}

std::vector<object_ref> skyline_tree::first_layer() const {
  std::vector<object_ref> out;
  if (layers_.empty()) return out;
  for (const auto& k : layers_[0]) out.push_back(nodes_[std::get<2>(k)].obj);
  return out;
}

std::vector<std::vector<object_ref>> skyline_tree::layers() const {
  std::vector<std::vector<object_ref>> out;
  for (const auto& l : layers_) {
    out.emplace_back();
    for (const auto& k : l) out.back().push_back(nodes_[std::get<2>(k)].obj);
  }
  return out;
}

std::vector<object_ref> skyline_tree::nodes() const {
  std::vector<object_ref> out;
  for (int n : ordered()) out.push_back(nodes_[n].obj);
  return out;
}

size_t skyline_tree::layer_count() const { return layers_.size(); }

std::optional<size_t> skyline_tree::layer_of(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return nodes_[it->second].layer;
}

std::optional<std::string> skyline_tree::parent_of(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  int p = nodes_[it->second].parent;
  return p < 0 ? std::string() : nodes_[p].obj->id;
}

std::vector<std::string> skyline_tree::children_of(const std::string& id) const {
  std::vector<std::string> out;
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return out;
  for (int c : nodes_[it->second].children) out.push_back(nodes_[c].obj->id);
  std::sort(out.begin(), out.end(), id_less);
  return out;
}

void skyline_tree::debug_set_parent(const std::string& child, const std::string& parent) {
  int c = by_id_.at(child);
  set_parent(c, parent.empty() ? -1 : by_id_.at(parent));
}

bool skyline_tree::validate(std::vector<std::string>* diag) const {
  std::vector<std::string> errs;
  const double thr = 1.0 - alpha_;
  auto all = ordered();
  for (size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].empty()) errs.push_back(fmt::format("layer {} is empty", l + 1));
    int64_t last = INT64_MIN;
    for (const auto& k : layers_[l]) {
      int n = std::get<2>(k);
      if (nodes_[n].layer != l + 1)
        errs.push_back(fmt::format("{} listed on layer {} but marked {}", nodes_[n].obj->id, l + 1, nodes_[n].layer));
      if (nodes_[n].obj->exp < last) errs.push_back(fmt::format("layer {} not sorted by expiry", l + 1));
      last = nodes_[n].obj->exp;
    }
  }
  for (int n : all) {
    const node& x = nodes_[n];
    if (x.parent < 0) {
      if (x.layer != 1) errs.push_back(fmt::format("{} on layer {} has no parent", x.obj->id, x.layer));
      continue;
    }
    const node& p = nodes_[x.parent];
    if (!p.alive) {
      errs.push_back(fmt::format("{} has a dead parent", x.obj->id));
      continue;
    }
    if (p.layer + 1 != x.layer)
      errs.push_back(fmt::format("{} on layer {} under parent {} on layer {}", x.obj->id, x.layer, p.obj->id, p.layer));
    if (!(p.obj->exp < x.obj->exp))
      errs.push_back(fmt::format("parent {} (exp {}) does not expire before {} (exp {})", p.obj->id, p.obj->exp,
                                 x.obj->id, x.obj->exp));
    double pr = dominance_probability(*p.obj, *x.obj);
    if (!prob_ge(pr, thr))
      errs.push_back(fmt::format("parent {} dominates {} with probability {} < {}", p.obj->id, x.obj->id, pr, thr));
    if (std::find(p.children.begin(), p.children.end(), n) == p.children.end())
      errs.push_back(fmt::format("{} missing from the child list of {}", x.obj->id, p.obj->id));
  }
  // no node may dominate anything on its own layer or above
  for (int a : all)
    for (int b : all) {
      if (a == b || nodes_[a].layer < nodes_[b].layer) continue;
      double pr = dominance_probability(*nodes_[a].obj, *nodes_[b].obj);
      if (prob_ge(pr, thr))
        errs.push_back(fmt::format("{} (layer {}) dominates {} (layer {}) with probability {}", nodes_[a].obj->id,
                                   nodes_[a].layer, nodes_[b].obj->id, nodes_[b].layer, pr));
    }
  if (diag) *diag = errs;
  return errs.empty();
}

std::string skyline_tree::dump() const {
  std::string s;
  for (size_t l = 0; l < layers_.size(); ++l) {
    std::vector<int> ns;
    for (const auto& k : layers_[l]) ns.push_back(std::get<2>(k));
    std::stable_sort(ns.begin(), ns.end(), [&](int a, int b) {
      if (nodes_[a].obj->exp != nodes_[b].obj->exp) return nodes_[a].obj->exp < nodes_[b].obj->exp;
      return id_less(nodes_[a].obj->id, nodes_[b].obj->id);
    });
    s += fmt::format("layer {}\n", l + 1);
    for (int n : ns) {
      const node& x = nodes_[n];
      s += fmt::format("{}({}, {}, {}, {})\n", std::string(2 * (l + 1), ' '), x.obj->id, x.obj->exp, x.layer,
                       x.parent < 0 ? "-" : nodes_[x.parent].obj->id);
    }
  }
  return s;
}

} // namespace pskyline
