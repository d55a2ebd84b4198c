#include "parachute/pattern.hpp"

#include <set>

namespace parachute {

namespace {

size_t utf8_length(unsigned char lead) {
  if (lead < 0x80)
    return 1;
  if ((lead >> 5) == 0x6)
    return 2;
  if ((lead >> 4) == 0xE)
    return 3;
  if ((lead >> 3) == 0x1E)
    return 4;
  return 1;
}

} // namespace

bool like_match(std::string_view value, std::string_view pattern) {
  size_t v = 0, p = 0;
  size_t star_p = std::string_view::npos, star_v = 0;
  while (v < value.size()) {
    if (p < pattern.size() && pattern[p] == '%') {
      star_p = p++;
      star_v = v;
    } else if (p < pattern.size() && pattern[p] == '_') {
      ++p;
      v += std::min(utf8_length(static_cast<unsigned char>(value[v])), value.size() - v);
    } else if (p < pattern.size() && pattern[p] == value[v]) {
      ++p;
      ++v;
    } else if (star_p != std::string_view::npos) {
      p = star_p + 1;
      star_v += std::min(utf8_length(static_cast<unsigned char>(value[star_v])), value.size() - star_v);
      v = star_v;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '%')
    ++p;
  return p == pattern.size();
}

std::string ascii_lowercase(std::string_view s) {
  std::string out(s);
  for (auto &c : out)
    if (c >= 'A' && c <= 'Z')
      c = static_cast<char>(c + 32);
  return out;
}

bool ilike_match(std::string_view value, std::string_view pattern) {
  return like_match(ascii_lowercase(value), ascii_lowercase(pattern));
}

namespace {

using Language = std::set<std::string>;

/// Recursive-descent enumerator over the supported regex subset.
class RegexEnumerator {
public:
  RegexEnumerator(std::string_view pattern, size_t cap) : s_(pattern), cap_(cap) {}

  std::optional<Language> run() {
    auto lang = alternation();
    if (!lang || pos_ != s_.size())
      return std::nullopt;
    return lang;
  }

private:
  std::optional<Language> alternation() {
    auto result = sequence();
    if (!result)
      return std::nullopt;
    while (pos_ < s_.size() && s_[pos_] == '|') {
      ++pos_;
      auto rhs = sequence();
      if (!rhs)
        return std::nullopt;
      result->insert(rhs->begin(), rhs->end());
      if (result->size() > cap_)
        return std::nullopt;
    }
    return result;
  }

  std::optional<Language> sequence() {
    Language result{""};
    while (pos_ < s_.size() && s_[pos_] != '|' && s_[pos_] != ')') {
      auto item_lang = item();
      if (!item_lang)
        return std::nullopt;
      Language next;
      for (const auto &prefix : result)
        for (const auto &suffix : *item_lang) {
          next.insert(prefix + suffix);
          if (next.size() > cap_)
            return std::nullopt;
        }
      result = std::move(next);
    }
    return result;
  }

  std::optional<Language> item() {
    auto lang = atom();
    if (!lang)
      return std::nullopt;
    if (pos_ < s_.size() && s_[pos_] == '?') {
      ++pos_;
      lang->insert("");
    }
    if (pos_ < s_.size() && (s_[pos_] == '*' || s_[pos_] == '+' || s_[pos_] == '{' || s_[pos_] == '?'))
      return std::nullopt;
    return lang;
  }

  std::optional<Language> atom() {
    const char c = s_[pos_];
    switch (c) {
    case '(': {
      ++pos_;
      auto inner = alternation();
      if (!inner || pos_ >= s_.size() || s_[pos_] != ')')
        return std::nullopt;
      ++pos_;
      return inner;
    }
    case '\\':
      if (pos_ + 1 >= s_.size())
        return std::nullopt;
      pos_ += 2;
      return Language{std::string(1, s_[pos_ - 1])};
    case '*':
    case '+':
    case '?':
    case '[':
    case ']':
    case '.':
    case '{':
    case '}':
    case '^':
    case '$':
    case ')':
      return std::nullopt;
    default:
      ++pos_;
      return Language{std::string(1, c)};
    }
  }

  std::string_view s_;
  size_t pos_ = 0;
  size_t cap_;
};

} // namespace

std::optional<std::vector<std::string>> enumerate_regex(std::string_view pattern, size_t cap) {
  auto lang = RegexEnumerator(pattern, cap).run();
  if (!lang)
    return std::nullopt;
  return std::vector<std::string>(lang->begin(), lang->end());
}

} // namespace parachute
