#pragma once

#include <map>
#include <string>
#include <string_view>

#include "btt/model.hpp"

namespace btt {

inline constexpr std::string_view kStatePrefix = "__STATE__/";

inline std::string state_key(std::string_view node) {
  return std::string(kStatePrefix) + std::string(node);
}

/// Blackboard: key -> value, kept sorted so dumps are stable.
class Memory {
 public:
  const Value* get(std::string_view key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  void set(std::string_view key, Value v) {
    auto it = entries_.find(key);
    if (it == entries_.end())
      entries_.emplace(std::string(key), std::move(v));
    else
      it->second = std::move(v);
  }

  void erase(std::string_view key) {
    if (auto it = entries_.find(key); it != entries_.end()) entries_.erase(it);
  }

  bool contains(std::string_view key) const { return entries_.find(key) != entries_.end(); }
  std::size_t size() const { return entries_.size(); }

  const std::map<std::string, Value, std::less<>>& entries() const { return entries_; }

  /// `<key> = <literal>` lines, sorted bytewise by key.
  std::string dump() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
      out += k;
      out += " = ";
      out += render_literal(v);
      out += '\n';
    }
    return out;
  }

 private:
  std::map<std::string, Value, std::less<>> entries_;
};

}  // namespace btt
