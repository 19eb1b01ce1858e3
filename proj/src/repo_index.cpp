#include "pskyline/repo_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

namespace pskyline {

std::vector<double> repository::domain_lengths() const {
  std::vector<double> l(dims(), 0.0);
  if (rows.empty()) return l;
  for (size_t k = 0; k < dims(); ++k) {
    auto [mn, mx] = std::minmax_element(rows.begin(), rows.end(),
                                        [k](const attr_vec& a, const attr_vec& b) { return a[k] < b[k]; });
    l[k] = (*mx)[k] - (*mn)[k];
  }
  return l;
}

bool query_range::contains(const attr_vec& row) const {
  for (const auto& [a, iv] : terms)
    if (!iv.contains(row[a])) return false;
  return true;
}

repository_index::repository_index(std::vector<size_t> dims, size_t dependent, double u, size_t lambda,
                                   size_t fanout)
    : dims_(std::move(dims)), dependent_(dependent), u_(u), lambda_(lambda), fanout_(std::max<size_t>(fanout, 2)) {
  if (!(u_ > 0.0)) throw std::invalid_argument("cell side must be positive");
  if (lambda_ < 1) throw std::invalid_argument("lambda must be at least 1");
  if (dims_.empty()) throw std::invalid_argument("index needs at least one dimension");
  if (std::find(dims_.begin(), dims_.end(), dependent_) != dims_.end())
    throw std::invalid_argument("dependent attribute cannot be indexed");
  root_ = new_node(false);
}

repository_index::repository_index(const repository& repo, std::vector<size_t> dims, size_t dependent, double u,
                                   size_t lambda, size_t fanout)
    : repository_index(std::move(dims), dependent, u, lambda, fanout) {
  if (repo.rows.empty()) throw std::invalid_argument("empty repository");
  // structure first, histograms once at the end
  for (const auto& r : repo.rows) {
    if (r.size() != repo.dims()) throw dimension_error("repository row width mismatch");
    samples_.push_back(r);
    place_sample(samples_.size() - 1);
  }
  for (size_t n = 0; n < nodes_.size(); ++n) rebuild_hist(static_cast<int>(n));
  std::fill(dirty_.begin(), dirty_.end(), 0);
}

int repository_index::new_node(bool cell) {
  node n;
  n.cell = cell;
  n.hist.assign(static_cast<size_t>(std::pow(lambda_, dims_.size())), bucket{});
  nodes_.push_back(std::move(n));
  dirty_.push_back(1);
  return static_cast<int>(nodes_.size() - 1);
}

std::vector<int64_t> repository_index::cell_key(const attr_vec& s) const {
  std::vector<int64_t> key;
  for (size_t a : dims_) key.push_back(static_cast<int64_t>(std::floor(s[a] / u_)));
  return key;
}

void repository_index::grow(int n, const attr_vec& lo, const attr_vec& hi) {
  while (n >= 0) {
    node& x = nodes_[n];
    bool changed = false;
    if (x.lo.empty()) {
      x.lo = lo;
      x.hi = hi;
      changed = true;
    } else {
      for (size_t k = 0; k < lo.size(); ++k) {
        if (lo[k] < x.lo[k]) x.lo[k] = lo[k], changed = true;
        if (hi[k] > x.hi[k]) x.hi[k] = hi[k], changed = true;
      }
    }
    if (!changed) return;
    dirty_[n] = 1;
    n = x.parent;
  }
}

int repository_index::place_sample(size_t i) {
  const attr_vec& s = samples_[i];
  auto key = cell_key(s);
  int c;
  auto it = cells_.find(key);
  if (it == cells_.end()) {
    c = new_node(true);
    nodes_[c].key = key;
    attr_vec lo, hi;
    for (size_t k = 0; k < dims_.size(); ++k) {
      lo.push_back(std::min(key[k] * u_, s[dims_[k]]));
      hi.push_back(std::max((key[k] + 1) * u_, s[dims_[k]]));
    }
    nodes_[c].lo = lo;
    nodes_[c].hi = hi;
    cells_.emplace(key, c);
    attach(c);
  } else {
    c = it->second;
  }
  nodes_[c].samples.push_back(i);
  attr_vec p;
  for (size_t a : dims_) p.push_back(s[a]);
  grow(c, p, p);
  return c;
}

static double volume(const attr_vec& lo, const attr_vec& hi) {
  double v = 1.0;
  for (size_t k = 0; k < lo.size(); ++k) v *= (hi[k] - lo[k]);
  return v;
}

static double margin(const attr_vec& lo, const attr_vec& hi) {
  double m = 0.0;
  for (size_t k = 0; k < lo.size(); ++k) m += hi[k] - lo[k];
  return m;
}

void repository_index::attach(int cell) {
  int n = root_;
  const node& c = nodes_[cell];
  while (!nodes_[n].children.empty() && !nodes_[nodes_[n].children.front()].cell) {
    int best = -1;
    double best_vol = 0, best_mar = 0, best_size = 0;
    for (int ch : nodes_[n].children) {
      const node& x = nodes_[ch];
      attr_vec lo = x.lo, hi = x.hi;
      for (size_t k = 0; k < lo.size(); ++k) lo[k] = std::min(lo[k], c.lo[k]), hi[k] = std::max(hi[k], c.hi[k]);
      double dv = volume(lo, hi) - volume(x.lo, x.hi);
      double dm = margin(lo, hi) - margin(x.lo, x.hi);
      double sz = volume(x.lo, x.hi);
      if (best < 0 || dv < best_vol || (dv == best_vol && (dm < best_mar || (dm == best_mar && sz < best_size)))) {
        best = ch, best_vol = dv, best_mar = dm, best_size = sz;
      }
    }
    n = best;
  }
  nodes_[cell].parent = n;
  nodes_[n].children.push_back(cell);
  dirty_[n] = 1;
  grow(n, nodes_[cell].lo, nodes_[cell].hi);
  if (nodes_[n].children.size() > fanout_) split(n);
}

void repository_index::split(int n) {
  // halve along the widest axis by child centre
  size_t axis = 0;
  double widest = -1;
  for (size_t k = 0; k < dims_.size(); ++k)
    if (nodes_[n].hi[k] - nodes_[n].lo[k] > widest) widest = nodes_[n].hi[k] - nodes_[n].lo[k], axis = k;
  auto kids = nodes_[n].children;
  std::stable_sort(kids.begin(), kids.end(), [&](int a, int b) {
    return nodes_[a].lo[axis] + nodes_[a].hi[axis] < nodes_[b].lo[axis] + nodes_[b].hi[axis];
  });
  const size_t half = kids.size() / 2;
  int m = new_node(false);
  auto refit = [&](int x, std::vector<int> ch) {
    nodes_[x].children = std::move(ch);
    nodes_[x].lo.clear();
    nodes_[x].hi.clear();
    for (int c : nodes_[x].children) {
      nodes_[c].parent = x;
      const node& cn = nodes_[c];
      if (nodes_[x].lo.empty()) {
        nodes_[x].lo = cn.lo, nodes_[x].hi = cn.hi;
      } else {
        for (size_t k = 0; k < cn.lo.size(); ++k) {
          nodes_[x].lo[k] = std::min(nodes_[x].lo[k], cn.lo[k]);
          nodes_[x].hi[k] = std::max(nodes_[x].hi[k], cn.hi[k]);
        }
      }
    }
    dirty_[x] = 1;
  };
  refit(n, std::vector<int>(kids.begin(), kids.begin() + half));
  refit(m, std::vector<int>(kids.begin() + half, kids.end()));
  int p = nodes_[n].parent;
  if (p < 0) {
    int r = new_node(false);
    root_ = r;
    refit(r, {n, m});
    return;
  }
  nodes_[m].parent = p;
  nodes_[p].children.push_back(m);
  dirty_[p] = 1;
  if (nodes_[p].children.size() > fanout_) split(p);
}

double repository_index::edge(const node& n, size_t k, size_t b) const {
  if (b == 0) return n.lo[k];
  if (b >= lambda_) return n.hi[k];
  return n.lo[k] + static_cast<double>(b) * (n.hi[k] - n.lo[k]) / static_cast<double>(lambda_);
}

size_t repository_index::bucket_of(const node& n, const attr_vec& s) const {
  size_t idx = 0, stride = 1;
  for (size_t k = 0; k < dims_.size(); ++k) {
    double x = s[dims_[k]];
    size_t b = 0;
    double w = n.hi[k] - n.lo[k];
    if (w > 0) {
      double f = std::floor((x - n.lo[k]) / w * static_cast<double>(lambda_));
      b = f <= 0 ? 0 : std::min(static_cast<size_t>(f), lambda_ - 1);
      while (b > 0 && x < edge(n, k, b)) --b;
      while (b + 1 < lambda_ && x > edge(n, k, b + 1)) ++b;
    }
    idx += b * stride;
    stride *= lambda_;
  }
  return idx;
}

void repository_index::add_to_hist(node& n, const attr_vec& s) const {
  bucket& b = n.hist[bucket_of(n, s)];
  double v = s[dependent_];
  if (b.cnt == 0) {
    b.lo = b.hi = v;
  } else {
    b.lo = std::min(b.lo, v);
    b.hi = std::max(b.hi, v);
  }
  ++b.cnt;
}

void repository_index::collect(int n, std::vector<size_t>& out) const {
  const node& x = nodes_[n];
  if (x.cell) {
    out.insert(out.end(), x.samples.begin(), x.samples.end());
    return;
  }
  for (int c : x.children) collect(c, out);
}

void repository_index::rebuild_hist(int n) {
  node& x = nodes_[n];
  std::fill(x.hist.begin(), x.hist.end(), bucket{});
  if (x.lo.empty()) return;
  std::vector<size_t> ids;
  collect(n, ids);
  for (size_t i : ids) add_to_hist(x, samples_[i]);
}

void repository_index::insert_sample(const attr_vec& s) {
  if (s.size() <= std::max(dependent_, *std::max_element(dims_.begin(), dims_.end())))
    throw dimension_error("sample narrower than the indexed attributes");
  for (double v : s)
    if (!std::isfinite(v)) throw std::invalid_argument("sample has a non-finite value");
  samples_.push_back(s);
  int c = place_sample(samples_.size() - 1);
  for (size_t n = 0; n < nodes_.size(); ++n)
    if (dirty_[n]) rebuild_hist(static_cast<int>(n));
  for (int n = c; n >= 0; n = nodes_[n].parent)
    if (!dirty_[n]) add_to_hist(nodes_[n], s);
  std::fill(dirty_.begin(), dirty_.end(), 0);
}

bool repository_index::intersects(const attr_vec& lo, const attr_vec& hi, const query_range& q) const {
  for (const auto& [a, iv] : q.terms) {
    auto it = std::find(dims_.begin(), dims_.end(), a);
    if (it == dims_.end()) continue;
    size_t k = static_cast<size_t>(it - dims_.begin());
    if (hi[k] < iv.lo || lo[k] > iv.hi) return false;
  }
  return true;
}

bool repository_index::inside(const attr_vec& lo, const attr_vec& hi, const query_range& q) const {
  for (const auto& [a, iv] : q.terms) {
    auto it = std::find(dims_.begin(), dims_.end(), a);
    if (it == dims_.end()) return false;
    size_t k = static_cast<size_t>(it - dims_.begin());
    if (lo[k] < iv.lo || hi[k] > iv.hi) return false;
  }
  return true;
}

std::vector<size_t> repository_index::range_query(const query_range& q) const {
  std::vector<size_t> out;
  if (nodes_[root_].lo.empty()) return out;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    const node& x = nodes_[n];
    if (!intersects(x.lo, x.hi, q)) continue;
    if (x.cell) {
      if (inside(x.lo, x.hi, q)) {
        out.insert(out.end(), x.samples.begin(), x.samples.end());
      } else {
        for (size_t i : x.samples)
          if (q.contains(samples_[i])) out.push_back(i);
      }
      continue;
    }
    for (int c : x.children) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

size_t repository_index::height() const {
  size_t h = 0;
  int n = root_;
  while (!nodes_[n].cell && !nodes_[n].children.empty()) n = nodes_[n].children.front(), ++h;
  return h;
}

bounds repository_index::attribute_bounds(const query_range& q, size_t depth) const {
  if (depth > height()) throw std::invalid_argument(fmt::format("depth {} exceeds height {}", depth, height()));
  bounds out;
  std::vector<int> level{root_};
  for (size_t i = 0; i < depth; ++i) {
    std::vector<int> next;
    for (int n : level)
      for (int c : nodes_[n].children) next.push_back(c);
    level.swap(next);
  }
  for (int n : level) {
    const node& x = nodes_[n];
    if (x.lo.empty() || !intersects(x.lo, x.hi, q)) continue;
    for (size_t idx = 0; idx < x.hist.size(); ++idx) {
      const bucket& b = x.hist[idx];
      if (b.cnt == 0) continue;
      attr_vec lo(dims_.size()), hi(dims_.size());
      size_t rem = idx;
      for (size_t k = 0; k < dims_.size(); ++k) {
        size_t bk = rem % lambda_;
        rem /= lambda_;
        lo[k] = edge(x, k, bk);
        hi[k] = edge(x, k, bk + 1);
      }
      if (!intersects(lo, hi, q)) continue;
      if (!out.any) {
        out.lo = b.lo, out.hi = b.hi;
      } else {
        out.lo = std::min(out.lo, b.lo), out.hi = std::max(out.hi, b.hi);
      }
      out.any = true;
      out.count_hi += b.cnt;
      if (inside(lo, hi, q)) out.count_lo += b.cnt;
    }
  }
  return out;
}

double repository_index::estimate_matches(const std::vector<std::pair<size_t, double>>& tolerances) const {
  const node& r = nodes_[root_];
  if (r.lo.empty() || samples_.empty()) return 0.0;
  std::vector<size_t> ks;
  double shrink = 1.0;
  for (const auto& [a, eps] : tolerances) {
    auto it = std::find(dims_.begin(), dims_.end(), a);
    if (it == dims_.end()) continue;
    size_t k = static_cast<size_t>(it - dims_.begin());
    ks.push_back(k);
    double w = (r.hi[k] - r.lo[k]) / static_cast<double>(lambda_);
    if (w > 0) shrink *= std::min(1.0, 2.0 * eps / w);
  }
  std::map<std::vector<size_t>, double> marginal;
  for (size_t idx = 0; idx < r.hist.size(); ++idx) {
    if (r.hist[idx].cnt == 0) continue;
    std::vector<size_t> key;
    for (size_t k : ks) key.push_back((idx / static_cast<size_t>(std::pow(lambda_, k))) % lambda_);
    marginal[key] += static_cast<double>(r.hist[idx].cnt);
  }
  double n = static_cast<double>(samples_.size()), est = 0.0;
  for (const auto& [key, c] : marginal) est += c * c / n;
  return est * shrink;
}

std::string repository_index::check() const {
  std::string err;
  size_t total = 0;
  for (size_t n = 0; n < nodes_.size(); ++n) {
    const node& x = nodes_[n];
    if (x.lo.empty()) continue;
    std::vector<size_t> ids;
    collect(static_cast<int>(n), ids);
    node fresh = x;
    std::fill(fresh.hist.begin(), fresh.hist.end(), bucket{});
    for (size_t i : ids) add_to_hist(fresh, samples_[i]);
    uint64_t sum = 0;
    for (size_t b = 0; b < x.hist.size(); ++b) {
      sum += x.hist[b].cnt;
      const auto& h = x.hist[b];
      const auto& f = fresh.hist[b];
      if (h.cnt != f.cnt || (h.cnt > 0 && (h.lo != f.lo || h.hi != f.hi)))
        err += fmt::format("node {} bucket {} differs from a recount\n", n, b);
    }
    if (sum != ids.size()) err += fmt::format("node {} counts {} of {} samples\n", n, sum, ids.size());
    for (size_t i : ids)
      for (size_t k = 0; k < dims_.size(); ++k) {
        double v = samples_[i][dims_[k]];
        if (v < x.lo[k] || v > x.hi[k]) err += fmt::format("node {} mbr misses sample {}\n", n, i);
      }
    if (x.parent >= 0) {
      const node& p = nodes_[x.parent];
      for (size_t k = 0; k < dims_.size(); ++k)
        if (x.lo[k] < p.lo[k] || x.hi[k] > p.hi[k]) err += fmt::format("node {} escapes its parent\n", n);
    }
    if (x.cell) total += x.samples.size();
  }
  if (total != samples_.size()) err += fmt::format("cells hold {} of {} samples\n", total, samples_.size());
  return err;
}

} // namespace pskyline
