#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "btt/model.hpp"

namespace btt {

/// latch, reset, sequence_star, selector_star; parsed once on first use.
const TemplateRegistry& builtin_templates();

/// Embedded source text of each builtin as (file name, YAML).
const std::vector<std::pair<std::string_view, std::string_view>>& builtin_sources();

}  // namespace btt
