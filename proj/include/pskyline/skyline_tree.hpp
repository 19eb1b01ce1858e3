#pragma once

#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "pskyline/model.hpp"

namespace pskyline {

enum class insert_status { inserted, pruned };

struct insert_outcome {
  insert_status status = insert_status::inserted;
  size_t layer = 0;
  object_ref pruner;               // set when pruned
  std::vector<object_ref> removed; // nodes the new object outlives and dominates
};

// Layered synopsis of the objects that can still become skylines. A parent
// dominates its child with probability >= 1 - alpha and expires first; a
// node's layer is one past the deepest node dominating it.
class skyline_tree {
public:
  explicit skyline_tree(double alpha);

  insert_outcome insert(object_ref o);
  std::vector<object_ref> delete_expired(int64_t t);

  std::vector<object_ref> first_layer() const;
  std::vector<std::vector<object_ref>> layers() const;
  std::vector<object_ref> nodes() const;
  size_t size() const { return by_id_.size(); }
  size_t layer_count() const;
  double alpha() const { return alpha_; }

  bool contains(const std::string& id) const { return by_id_.count(id) > 0; }
  std::optional<size_t> layer_of(const std::string& id) const;
  std::optional<std::string> parent_of(const std::string& id) const; // empty string for layer 1
  std::vector<std::string> children_of(const std::string& id) const;

  bool validate(std::vector<std::string>* diag = nullptr) const;
  std::string dump() const;

  // rewires a parent pointer without any checks, for exercising validate
  void debug_set_parent(const std::string& child, const std::string& parent);

private:
  struct node {
    object_ref obj;
    uint64_t seq = 0;
    int parent = -1;
    size_t layer = 1;
    std::vector<int> in;  // nodes dominating this one
    std::vector<int> out; // nodes this one dominates
    std::vector<int> children;
    bool alive = false;
  };
  using layer_key = std::tuple<int64_t, uint64_t, int>;

  double alpha_;
  uint64_t seq_ = 0;
  std::vector<node> nodes_;
  std::vector<int> free_;
  std::unordered_map<std::string, int> by_id_;
  std::vector<std::set<layer_key>> layers_;

  layer_key key(int n) const { return {nodes_[n].obj->exp, nodes_[n].seq, n}; }
  void place(int n, size_t layer);
  void unplace(int n);
  void set_parent(int n, int p);
  void remove_node(int n, std::vector<int>& affected);
  void relayer(const std::vector<int>& seeds);
  std::vector<int> ordered() const;
};

} // namespace pskyline
