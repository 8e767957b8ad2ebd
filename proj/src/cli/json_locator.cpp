#include "semimart/cli/json_locator.hpp"

#include <algorithm>
#include <iterator>

#include "json.hpp"

namespace semimart::cli {

int line_at(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

std::string escape_pointer_token(std::string_view token) {
  std::string out;
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

namespace {

// Character iterator that records how far the parser has read, so SAX
// callbacks can recover the position of the token just consumed.
class TrackingIterator {
 public:
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  TrackingIterator() = default;
  TrackingIterator(const char* p, const char** mark) : p_(p), mark_(mark) {}

  reference operator*() const { return *p_; }
  TrackingIterator& operator++() {
    ++p_;
    if (mark_ != nullptr) *mark_ = p_;
    return *this;
  }
  TrackingIterator operator++(int) {
    auto copy = *this;
    ++*this;
    return copy;
  }
  bool operator==(const TrackingIterator& o) const { return p_ == o.p_; }
  bool operator!=(const TrackingIterator& o) const { return p_ != o.p_; }

 private:
  const char* p_ = nullptr;
  const char** mark_ = nullptr;
};

class LineRecorder : public nlohmann::json_sax<nlohmann::json> {
 public:
  LineRecorder(std::string_view text, const char** mark, std::map<std::string, int>& lines)
      : text_(text), mark_(mark), lines_(lines) {}

  bool null() override { return value(); }
  bool boolean(bool) override { return value(); }
  bool number_integer(number_integer_t) override { return value(); }
  bool number_unsigned(number_unsigned_t) override { return value(); }
  bool number_float(number_float_t, const string_t&) override { return value(); }
  bool string(string_t&) override { return value(); }
  bool binary(binary_t&) override { return value(); }

  bool start_object(std::size_t) override {
    const auto here = begin_value();
    stack_.push_back({here, true, 0});
    return true;
  }
  bool key(string_t& k) override {
    auto& top = stack_.back();
    pending_ = top.path + "/" + escape_pointer_token(k);
    lines_[pending_] = current_line();
    return true;
  }
  bool end_object() override {
    stack_.pop_back();
    return true;
  }
  bool start_array(std::size_t) override {
    const auto here = begin_value();
    stack_.push_back({here, false, 0});
    return true;
  }
  bool end_array() override {
    stack_.pop_back();
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override {
    return false;
  }

 private:
  struct Frame {
    std::string path;
    bool object;
    std::size_t next_index;
  };

  int current_line() const {
    const auto consumed = static_cast<std::size_t>(*mark_ - text_.data());
    return line_at(text_, consumed == 0 ? 0 : consumed - 1);
  }

  // Pointer of the value that starts now; records array elements and the root.
  std::string begin_value() {
    if (stack_.empty()) {
      lines_[""] = current_line();
      return "";
    }
    auto& top = stack_.back();
    if (top.object) return pending_;
    std::string path = top.path + "/" + std::to_string(top.next_index++);
    lines_[path] = current_line();
    return path;
  }

  bool value() {
    begin_value();
    return true;
  }

  std::string_view text_;
  const char** mark_;
  std::map<std::string, int>& lines_;
  std::vector<Frame> stack_;
  std::string pending_;
};

}  // namespace

JsonLocator::JsonLocator(std::string_view text) {
  const char* mark = text.data();
  LineRecorder recorder(text, &mark, lines_);
  TrackingIterator first(text.data(), &mark);
  TrackingIterator last(text.data() + text.size(), nullptr);
  nlohmann::json::sax_parse(first, last, &recorder);
}

int JsonLocator::line_of(const std::string& pointer) const {
  std::string p = pointer;
  while (true) {
    if (auto it = lines_.find(p); it != lines_.end()) return it->second;
    if (p.empty()) return 0;
    p.erase(p.rfind('/'));
  }
}

}  // namespace semimart::cli
