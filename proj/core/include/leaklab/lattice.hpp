#pragma once

// Finite security lattices.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace leaklab {

using LabelId = int;

class SecurityLattice {
 public:
  /// Builds the reflexive-transitive closure of `order` (pairs a <= b) and
  /// checks antisymmetry, least upper bounds, a bottom and a top. When
  /// `join` is non-empty it must list x, y, x join y for every pair and agree
  /// with the order. Throws ConfigError otherwise.
  SecurityLattice(std::vector<std::string> elements, const std::vector<std::pair<std::string, std::string>>& order,
                  const std::vector<std::vector<std::string>>& join = {});

  /// {low <= high}.
  static SecurityLattice two_point();
  /// Chain of the given names, first is bottom.
  static SecurityLattice chain(const std::vector<std::string>& names);

  /// {"elements": [...], "order": [[a, b], ...], "join": [[x, y, z], ...]}
  static SecurityLattice from_json(std::string_view text);
  static SecurityLattice load(const std::string& path);
  std::string to_json() const;

  std::size_t size() const { return names_.size(); }
  const std::string& name(LabelId l) const { return names_.at(static_cast<std::size_t>(l)); }
  const std::vector<std::string>& names() const { return names_; }
  LabelId id(std::string_view name) const;  // throws ConfigError
  bool contains(std::string_view name) const;

  bool leq(LabelId a, LabelId b) const { return leq_[index(a, b)]; }
  LabelId join(LabelId a, LabelId b) const { return join_[index(a, b)]; }
  LabelId bottom() const { return bottom_; }
  LabelId top() const { return top_; }

 private:
  std::size_t index(LabelId a, LabelId b) const {
    return static_cast<std::size_t>(a) * names_.size() + static_cast<std::size_t>(b);
  }

  std::vector<std::string> names_;
  std::vector<bool> leq_;
  std::vector<LabelId> join_;
  LabelId bottom_ = 0;
  LabelId top_ = 0;
};

}  // namespace leaklab
