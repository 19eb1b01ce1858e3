#include "pskyline/engine.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_set>

#include <fmt/core.h>

namespace pskyline {

namespace {

double point_survival(const attr_vec& point, const std::string& self, const window& w) {
  double prod = 1.0;
  for (const auto& o : w.objects) {
    if (o->id == self) continue;
    prod *= 1.0 - dominance_probability(*o, point);
    if (prod <= 0.0) return 0.0;
  }
  return prod;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

double skyline_probability(const prob_object& obj, const window& w) {
  double s = 0.0;
  for (const auto& in : obj.instances) s += in.p * point_survival(in.attrs, obj.id, w);
  return std::clamp(s, 0.0, 1.0);
}

double lb_skyline_probability(const prob_object& obj, const window& w) {
  return point_survival(obj.min, obj.id, w);
}

double ub_skyline_probability(const prob_object& obj, const window& w) {
  return point_survival(obj.max, obj.id, w);
}

std::vector<std::string> answer_set::ids() const {
  std::vector<std::string> out;
  for (const auto& m : members) out.push_back(m.id);
  return out;
}

bool answer_set::contains(const std::string& id) const {
  return std::any_of(members.begin(), members.end(), [&](const answer& m) { return m.id == id; });
}

answer_set refine(const skyline_tree& tree, const window& w, double alpha, const answer_set& prev,
                  update_flags flags) {
  if (!flags.insertions && !flags.deletions) {
    answer_set same = prev;
    same.t = w.t;
    return same;
  }
  answer_set out;
  out.t = w.t;
  std::unordered_set<std::string> carried;
  if (!flags.insertions) {
    // deletions only: surviving answers stay answers, their old value now a lower bound
    std::unordered_set<std::string> alive;
    for (const auto& o : w.objects) alive.insert(o->id);
    for (const auto& m : prev.members)
      if (alive.count(m.id)) {
        out.members.push_back({m.id, m.p, false});
        carried.insert(m.id);
      }
  }
  for (const auto& c : tree.first_layer()) {
    if (carried.count(c->id)) continue;
    double lb = lb_skyline_probability(*c, w);
    if (prob_gt(lb, alpha)) {
      out.members.push_back({c->id, lb, c->instances.size() == 1});
      continue;
    }
    double p = skyline_probability(*c, w);
    if (prob_gt(p, alpha)) out.members.push_back({c->id, p, true});
  }
  std::sort(out.members.begin(), out.members.end(), [](const answer& a, const answer& b) { return id_less(a.id, b.id); });
  return out;
}

engine::engine(query_config cfg, std::shared_ptr<const imputer> imp)
    : cfg_(cfg), imputer_(std::move(imp)), tree_(cfg.alpha) {
  if (cfg_.d == 0) throw std::invalid_argument("dimensionality must be positive");
  if (imputer_ && imputer_->repo().dims() != cfg_.d)
    throw dimension_error("repository width differs from the configured dimensionality");
}

bool engine::live(const std::string& id) const {
  return std::any_of(window_.objects.begin(), window_.objects.end(), [&](const object_ref& o) { return o->id == id; });
}

void engine::expire(int64_t t, update_flags& flags) {
  if (started_ && t < window_.t)
    throw std::invalid_argument(fmt::format("timestamp {} precedes the current {}", t, window_.t));
  started_ = true;
  window_.t = t;
  size_t before = window_.objects.size();
  std::erase_if(window_.objects, [t](const object_ref& o) { return o->exp <= t; });
  report_.expired = before - window_.objects.size();
  if (report_.expired) flags.deletions = true;
  tree_.delete_expired(t);
}

void engine::admit(object_ref o, update_flags& flags) {
  window_.objects.push_back(o);
  flags.insertions = true;
  const double a = cfg_.alpha;
  auto nodes = tree_.nodes();
  for (const auto& n : nodes)
    if (spatial_prune(*o, *n)) return void(++report_.pruned.spatial);
  for (const auto& n : nodes)
    if (max_corner_prune(*o, *n, a)) return void(++report_.pruned.max_corner);
  for (const auto& n : nodes)
    if (min_corner_prune(*o, *n, a)) return void(++report_.pruned.min_corner);
  auto res = tree_.insert(o);
  if (res.status == insert_status::pruned) return void(++report_.pruned.exact);
  ++report_.inserted;
  for (const auto& r : res.removed) {
    if (spatial_prune(*r, *o))
      ++report_.evicted.spatial;
    else if (max_corner_prune(*r, *o, a))
      ++report_.evicted.max_corner;
    else if (min_corner_prune(*r, *o, a))
      ++report_.evicted.min_corner;
    else
      ++report_.evicted.exact;
  }
}

const answer_set& engine::process_tick(int64_t t, const std::vector<stream_object>& arrivals) {
  auto t0 = std::chrono::steady_clock::now();
  report_ = tick_report{};
  report_.t = t;
  update_flags flags;
  expire(t, flags);
  for (const auto& s : arrivals) {
    ++report_.arrivals;
    try {
      check_stream_object(s, cfg_.d);
      if (s.arr != t) throw std::invalid_argument(fmt::format("object {} arrives at {} not {}", s.id, s.arr, t));
      if (live(s.id)) throw std::invalid_argument("object " + s.id + " is already live");
      prob_object p;
      if (s.complete()) {
        p = certain_object(s);
      } else {
        if (!imputer_) throw std::invalid_argument("object " + s.id + " is incomplete and no repository is loaded");
        p = imputer_->impute(s);
      }
      admit(std::make_shared<const prob_object>(std::move(p)), flags);
    } catch (const std::exception& e) {
      ++report_.rejected;
      report_.diagnostics.push_back(e.what());
    }
  }
  report_.maintain_sec = seconds_since(t0);
  auto t1 = std::chrono::steady_clock::now();
  answers_ = refine(tree_, window_, cfg_.alpha, answers_, flags);
  report_.query_sec = seconds_since(t1);
  report_.window_size = window_.objects.size();
  report_.tree_size = tree_.size();
  report_.layer1 = tree_.first_layer().size();
  return answers_;
}

const answer_set& engine::process_imputed(int64_t t, std::vector<prob_object> arrivals) {
  auto t0 = std::chrono::steady_clock::now();
  report_ = tick_report{};
  report_.t = t;
  update_flags flags;
  expire(t, flags);
  for (auto& p : arrivals) {
    ++report_.arrivals;
    try {
      if (p.dims() != cfg_.d) throw dimension_error("object " + p.id + " has the wrong dimensionality");
      if (p.arr != t) throw std::invalid_argument(fmt::format("object {} arrives at {} not {}", p.id, p.arr, t));
      if (p.exp <= p.arr) throw std::invalid_argument("object " + p.id + " expires before it arrives");
      if (live(p.id)) throw std::invalid_argument("object " + p.id + " is already live");
      admit(std::make_shared<const prob_object>(std::move(p)), flags);
    } catch (const std::exception& e) {
      ++report_.rejected;
      report_.diagnostics.push_back(e.what());
    }
  }
  report_.maintain_sec = seconds_since(t0);
  auto t1 = std::chrono::steady_clock::now();
  answers_ = refine(tree_, window_, cfg_.alpha, answers_, flags);
  report_.query_sec = seconds_since(t1);
  report_.window_size = window_.objects.size();
  report_.tree_size = tree_.size();
  report_.layer1 = tree_.first_layer().size();
  return answers_;
}

std::string format_answers(const answer_set& a) {
  std::string s = fmt::format("{}:", a.t);
  for (const auto& m : a.members) s += fmt::format(" {}@{:.6f}", m.id, m.p);
  return s;
}

} // namespace pskyline
