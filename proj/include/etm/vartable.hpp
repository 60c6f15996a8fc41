#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "etm/error.hpp"

namespace etm {

// A variable is a role tag plus a structured index, printed base[i1,i2,...].
struct Var {
  std::string base;
  std::vector<std::string> idx;

  std::string str() const {
    if (idx.empty()) return base;
    std::string s = base + "[";
    for (size_t i = 0; i < idx.size(); ++i) {
      if (i) s += ",";
      s += idx[i];
    }
    return s + "]";
  }

  friend bool operator==(const Var& a, const Var& b) {
    return a.base == b.base && a.idx == b.idx;
  }
};

// Immutable ordered list of variables; the order defines the monomial order.
class VarTable {
 public:
  static std::shared_ptr<const VarTable> make(std::vector<Var> vars) {
    auto t = std::make_shared<VarTable>();
    t->vars_ = std::move(vars);
    for (size_t i = 0; i < t->vars_.size(); ++i) {
      auto [it, fresh] = t->byname_.emplace(t->vars_[i].str(), i);
      require_input(fresh, "duplicate variable '" + t->vars_[i].str() + "'");
    }
    return t;
  }

  size_t size() const { return vars_.size(); }
  const Var& var(size_t i) const { return vars_[i]; }
  std::string name(size_t i) const { return vars_[i].str(); }

  int find(const std::string& name) const {
    auto it = byname_.find(name);
    return it == byname_.end() ? -1 : static_cast<int>(it->second);
  }

  size_t index_of(const std::string& name) const {
    int i = find(name);
    require_input(i >= 0, "unknown variable '" + name + "'");
    return static_cast<size_t>(i);
  }

  friend bool operator==(const VarTable& a, const VarTable& b) {
    if (a.vars_.size() != b.vars_.size()) return false;
    for (size_t i = 0; i < a.vars_.size(); ++i)
      if (!(a.vars_[i] == b.vars_[i])) return false;
    return true;
  }

  std::vector<Var> vars_;

 private:
  std::map<std::string, size_t> byname_;
};

using VarTablePtr = std::shared_ptr<const VarTable>;

inline bool same_table(const VarTablePtr& a, const VarTablePtr& b) {
  return a == b || (a && b && *a == *b);
}

}  // namespace etm
