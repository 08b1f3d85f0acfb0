#include "leaklab/lattice.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "leaklab/error.hpp"

namespace leaklab {

SecurityLattice::SecurityLattice(std::vector<std::string> elements,
                                 const std::vector<std::pair<std::string, std::string>>& order,
                                 const std::vector<std::vector<std::string>>& join)
    : names_(std::move(elements)) {
  const std::size_t n = names_.size();
  if (n == 0) throw ConfigError("lattice has no elements");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (names_[i] == names_[j]) throw ConfigError("duplicate lattice element '" + names_[i] + "'");
    }
  }
  leq_.assign(n * n, false);
  for (std::size_t i = 0; i < n; ++i) leq_[i * n + i] = true;
  for (const auto& [a, b] : order) leq_[index(id(a), id(b))] = true;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (leq_[i * n + k] && leq_[k * n + j]) leq_[i * n + j] = true;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && leq_[i * n + j] && leq_[j * n + i]) {
        throw ConfigError("lattice order is not antisymmetric: " + names_[i] + " and " + names_[j]);
      }
    }
  }
  join_.assign(n * n, -1);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      int lub = -1;
      for (std::size_t c = 0; c < n; ++c) {
        if (!leq_[a * n + c] || !leq_[b * n + c]) continue;
        if (lub < 0 || leq_[c * n + static_cast<std::size_t>(lub)]) lub = static_cast<int>(c);
      }
      if (lub < 0) throw ConfigError("no upper bound for " + names_[a] + " and " + names_[b]);
      for (std::size_t c = 0; c < n; ++c) {
        if (leq_[a * n + c] && leq_[b * n + c] && !leq_[static_cast<std::size_t>(lub) * n + c]) {
          throw ConfigError("no least upper bound for " + names_[a] + " and " + names_[b]);
        }
      }
      join_[a * n + b] = lub;
    }
  }
  bottom_ = -1;
  top_ = -1;
  for (std::size_t c = 0; c < n; ++c) {
    bool is_bottom = true;
    bool is_top = true;
    for (std::size_t x = 0; x < n; ++x) {
      is_bottom &= leq_[c * n + x];
      is_top &= leq_[x * n + c];
    }
    if (is_bottom) bottom_ = static_cast<LabelId>(c);
    if (is_top) top_ = static_cast<LabelId>(c);
  }
  if (bottom_ < 0) throw ConfigError("lattice has no bottom element");
  if (top_ < 0) throw ConfigError("lattice has no top element");
  for (const auto& row : join) {
    if (row.size() != 3) throw ConfigError("join table rows must be [x, y, x join y]");
    if (this->join(id(row[0]), id(row[1])) != id(row[2])) {
      throw ConfigError("join table says " + row[0] + " join " + row[1] + " = " + row[2] +
                        ", but the order gives " + name(this->join(id(row[0]), id(row[1]))));
    }
  }
}

SecurityLattice SecurityLattice::two_point() { return SecurityLattice({"low", "high"}, {{"low", "high"}}); }

SecurityLattice SecurityLattice::chain(const std::vector<std::string>& names) {
  std::vector<std::pair<std::string, std::string>> order;
  for (std::size_t i = 0; i + 1 < names.size(); ++i) order.emplace_back(names[i], names[i + 1]);
  return SecurityLattice(names, order);
}

SecurityLattice SecurityLattice::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    std::vector<std::string> elements = j.at("elements").get<std::vector<std::string>>();
    std::vector<std::pair<std::string, std::string>> order;
    for (const auto& pair : j.value("order", nlohmann::json::array())) {
      if (!pair.is_array() || pair.size() != 2) throw ConfigError("order entries must be [a, b] pairs");
      order.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
    }
    std::vector<std::vector<std::string>> join;
    for (const auto& row : j.value("join", nlohmann::json::array())) {
      join.push_back(row.get<std::vector<std::string>>());
    }
    return SecurityLattice(std::move(elements), order, join);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad lattice JSON: ") + e.what());
  }
}

SecurityLattice SecurityLattice::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read lattice file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string SecurityLattice::to_json() const {
  nlohmann::ordered_json j;
  j["elements"] = names_;
  auto order = nlohmann::ordered_json::array();
  auto join = nlohmann::ordered_json::array();
  for (LabelId a = 0; a < static_cast<LabelId>(size()); ++a) {
    for (LabelId b = 0; b < static_cast<LabelId>(size()); ++b) {
      if (a != b && leq(a, b)) order.push_back({name(a), name(b)});
      join.push_back({name(a), name(b), name(this->join(a, b))});
    }
  }
  j["order"] = order;
  j["join"] = join;
  return j.dump(2);
}

LabelId SecurityLattice::id(std::string_view n) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == n) return static_cast<LabelId>(i);
  }
  throw ConfigError("unknown security label '" + std::string(n) + "'");
}

bool SecurityLattice::contains(std::string_view n) const {
  for (const auto& x : names_) {
    if (x == n) return true;
  }
  return false;
}

}  // namespace leaklab
