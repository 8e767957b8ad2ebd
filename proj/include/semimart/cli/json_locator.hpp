#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace semimart::cli {

// 1-based line of a byte offset into text.
int line_at(std::string_view text, std::size_t offset);

// Source lines of every value in a JSON document, keyed by JSON pointer.
// Object members map to the line of their key.
class JsonLocator {
 public:
  // Text must be valid JSON; on a syntax error the map is left partial.
  explicit JsonLocator(std::string_view text);

  // Line of the pointer or of its nearest located ancestor; 0 if none.
  int line_of(const std::string& pointer) const;

 private:
  std::map<std::string, int> lines_;
};

// RFC 6901 escaping of one reference token.
std::string escape_pointer_token(std::string_view token);

}  // namespace semimart::cli
