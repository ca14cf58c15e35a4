#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <ext/pb_ds/assoc_container.hpp>
#include <ext/pb_ds/tree_policy.hpp>

namespace prioq {

using CustomerId = std::uint64_t;

/// One customer present in the system. Ordered by priority, then by id with
/// the earlier arrival (smaller id) ranking higher on exact ties.
struct RegistryEntry {
  double priority = 0.0;
  CustomerId id = 0;

  friend bool operator==(const RegistryEntry&, const RegistryEntry&) = default;
  friend bool operator<(const RegistryEntry& a, const RegistryEntry& b) {
    if (a.priority != b.priority) return a.priority < b.priority;
    return a.id > b.id;
  }
};

/// The point measure x_t: the multiset of priority levels in the system,
/// with logarithmic rank queries.
class PriorityRegistry {
public:
  std::size_t size() const { return tree_.size(); }
  bool empty() const { return tree_.empty(); }

  void insert(RegistryEntry e) { tree_.insert(e); }
  void erase(RegistryEntry e) {
    if (tree_.erase(e) == 0) throw std::out_of_range("PriorityRegistry::erase: entry not present");
  }
  bool contains(RegistryEntry e) const { return tree_.find(e) != tree_.end(); }

  /// Entries with priority < p.
  std::size_t count_lt(double p) const {
    // The largest possible id sorts first among entries at level p.
    return tree_.order_of_key({p, std::numeric_limits<CustomerId>::max()});
  }
  /// X_t(p) = x_t([0, p]).
  std::size_t count_leq(double p) const { return size() - count_gt(p); }
  /// Xbar_t(p) = x_t((p, 1]).
  std::size_t count_gt(double p) const {
    // Entries strictly below (p, id=0) are exactly those with priority <= p.
    return size() - tree_.order_of_key({p, 0}) - (tree_.find({p, 0}) != tree_.end() ? 1 : 0);
  }
  /// Entries with lo <= priority < hi.
  std::size_t count_in(double lo, double hi) const {
    if (lo > hi) throw std::invalid_argument("PriorityRegistry::count_in: lo > hi");
    return count_lt(hi) - count_lt(lo);
  }

  /// 0 is the highest-ordered entry.
  RegistryEntry at_rank_from_top(std::size_t k) const {
    if (k >= size()) throw std::out_of_range("PriorityRegistry::at_rank_from_top");
    return *tree_.find_by_order(size() - 1 - k);
  }
  std::size_t rank_from_top(RegistryEntry e) const { return size() - 1 - tree_.order_of_key(e); }

  /// Number of customers in service with `servers` servers.
  std::size_t in_service_count(int servers) const {
    return std::min<std::size_t>(size(), static_cast<std::size_t>(servers));
  }
  bool in_service(RegistryEntry e, int servers) const {
    return contains(e) && rank_from_top(e) < static_cast<std::size_t>(servers);
  }

  /// Priorities in ascending order.
  std::vector<double> priorities() const {
    std::vector<double> out;
    out.reserve(size());
    for (const auto& e : tree_) out.push_back(e.priority);
    return out;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (const auto& e : tree_) f(e);
  }

private:
  using Tree = __gnu_pbds::tree<RegistryEntry, __gnu_pbds::null_type, std::less<RegistryEntry>,
                                __gnu_pbds::rb_tree_tag,
                                __gnu_pbds::tree_order_statistics_node_update>;
  Tree tree_;
};

/// Free-function forms of the rank queries.
inline std::size_t count_gt(const PriorityRegistry& r, double p) { return r.count_gt(p); }
inline std::size_t count_leq(const PriorityRegistry& r, double p) { return r.count_leq(p); }
inline std::size_t count_in(const PriorityRegistry& r, double lo, double hi) {
  return r.count_in(lo, hi);
}

}  // namespace prioq
