#pragma once

#include <string_view>
#include <vector>

namespace atdecor::detail {

struct EmbeddedFile {
  std::string_view path;  // relative to the corpus root, '/'-separated
  std::string_view content;
};

// Sorted by path.
const std::vector<EmbeddedFile>& embedded_corpus();

}  // namespace atdecor::detail
