#include "btt/stdlib.hpp"

#include "btt/textio.hpp"
#include "stdlib_sources.hpp"

namespace btt {

const std::vector<std::pair<std::string_view, std::string_view>>& builtin_sources() {
  static const std::vector<std::pair<std::string_view, std::string_view>> sources = {
      {"latch.yaml", embedded::kLatch},
      {"reset.yaml", embedded::kReset},
      {"sequence_star.yaml", embedded::kSequenceStar},
      {"selector_star.yaml", embedded::kSelectorStar},
  };
  return sources;
}

const TemplateRegistry& builtin_templates() {
  static const TemplateRegistry registry = [] {
    TemplateRegistry reg;
    for (const auto& [file, text] : builtin_sources()) {
      TemplateRegistry lib = parse_template_library(text, true);
      for (const auto& t : lib.entries()) reg.add(t);
    }
    return reg;
  }();
  return registry;
}

}  // namespace btt
