// Dutch suffix stripper (Snowball family). Operates on code points; tokens are
// expected lowercase. Uppercase I and Y are internal markers, never vowels.

#include <string>

#include "notewatch/textnorm.hpp"
#include "utf8.hpp"

namespace notewatch::textnorm {

namespace {

constexpr char32_t kEGrave = 0x00E8;

bool is_v(char32_t c) {
  return c == U'a' || c == U'e' || c == U'i' || c == U'o' || c == U'u' ||
         c == U'y' || c == kEGrave;
}

bool is_v_I(char32_t c) { return is_v(c) || c == U'I'; }
bool is_v_j(char32_t c) { return is_v(c) || c == U'j'; }

char32_t deaccent(char32_t c) {
  switch (c) {
    case 0x00E4: case 0x00E1: return U'a';
    case 0x00EB: case 0x00E9: return U'e';
    case 0x00EF: case 0x00ED: return U'i';
    case 0x00F6: case 0x00F3: return U'o';
    case 0x00FC: case 0x00FA: return U'u';
    default: return c;  // kEGrave deliberately kept
  }
}

}  // namespace

std::string stem(const std::string& token) {
  std::u32string w = detail::utf8_decode(token);
  if (w.empty()) return token;

  // prelude: strip umlaut/acute, shield initial y and intervocalic i/y
  for (auto& c : w) c = deaccent(c);
  if (w[0] == U'y') w[0] = U'Y';
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (!is_v(w[i])) continue;
    if (w[i + 1] == U'i' && i + 2 < w.size() && is_v(w[i + 2]))
      w[i + 1] = U'I';
    else if (w[i + 1] == U'y')
      w[i + 1] = U'Y';
  }

  // region marks; p1 floored at 3, second scan continues from the raw mark
  const std::size_t n = w.size();
  std::size_t p1 = n, p2 = n;
  {
    std::size_t c = 0;
    while (c < n && !is_v(w[c])) ++c;
    if (c < n) {
      ++c;
      while (c < n && is_v(w[c])) ++c;
      if (c < n) {
        p1 = ++c;
        if (p1 < 3) p1 = 3;
        while (c < n && !is_v(w[c])) ++c;
        if (c < n) {
          ++c;
          while (c < n && is_v(w[c])) ++c;
          if (c < n) p2 = c + 1;
        }
      }
    }
  }

  auto undouble = [&]() {
    if (w.ends_with(U"kk") || w.ends_with(U"dd") || w.ends_with(U"tt"))
      w.pop_back();
  };

  bool e_found = false;
  auto e_ending = [&]() {
    e_found = false;
    if (!w.ends_with(U"e")) return;
    const std::size_t pos = w.size() - 1;
    if (pos < p1 || pos == 0 || is_v(w[pos - 1])) return;
    w.erase(pos);
    e_found = true;
    undouble();
  };

  // shared by the en/ene suffixes and the en left behind by a removed heid
  auto en_ending = [&](std::size_t suffix_len) {
    const std::size_t pos = w.size() - suffix_len;
    if (pos < p1 || pos == 0 || is_v(w[pos - 1])) return;
    if (pos >= 3 && w.compare(pos - 3, 3, U"gem") == 0) return;
    w.erase(pos);
    undouble();
  };

  // step 1: longest matching suffix only, no fallback to shorter ones
  if (w.ends_with(U"heden")) {
    if (w.size() - 5 >= p1) {
      w.erase(w.size() - 5);
      w += U"heid";
    }
  } else if (w.ends_with(U"ene")) {
    en_ending(3);
  } else if (w.ends_with(U"en")) {
    en_ending(2);
  } else if (w.ends_with(U"se")) {
    const std::size_t pos = w.size() - 2;
    if (pos >= p1 && pos > 0 && !is_v_j(w[pos - 1])) w.erase(pos);
  } else if (w.ends_with(U"s")) {
    const std::size_t pos = w.size() - 1;
    if (pos >= p1 && pos > 0 && !is_v_j(w[pos - 1])) w.erase(pos);
  }

  // step 2
  e_ending();

  // step 3a: heid, then the en it may expose
  if (w.ends_with(U"heid")) {
    const std::size_t pos = w.size() - 4;
    if (pos >= p2 && (pos == 0 || w[pos - 1] != U'c')) {
      w.erase(pos);
      if (w.ends_with(U"en")) en_ending(2);
    }
  }

  // step 3b: derivational suffixes, longest match only
  if (w.ends_with(U"lijk")) {
    const std::size_t pos = w.size() - 4;
    if (pos >= p2) {
      w.erase(pos);
      e_ending();
    }
  } else if (w.ends_with(U"baar")) {
    const std::size_t pos = w.size() - 4;
    if (pos >= p2) w.erase(pos);
  } else if (w.ends_with(U"end") || w.ends_with(U"ing")) {
    const std::size_t pos = w.size() - 3;
    if (pos >= p2) {
      w.erase(pos);
      if (w.ends_with(U"ig") && w.size() - 2 >= p2 &&
          (w.size() < 3 || w[w.size() - 3] != U'e')) {
        w.erase(w.size() - 2);
      } else {
        undouble();
      }
    }
  } else if (w.ends_with(U"bar")) {
    const std::size_t pos = w.size() - 3;
    if (pos >= p2 && e_found) w.erase(pos);
  } else if (w.ends_with(U"ig")) {
    const std::size_t pos = w.size() - 2;
    if (pos >= p2 && (pos == 0 || w[pos - 1] != U'e')) w.erase(pos);
  }

  // step 4: undouble aa/ee/oo/uu in a closed final syllable
  if (w.size() >= 4) {
    const char32_t d = w[w.size() - 1];
    const char32_t v2 = w[w.size() - 2];
    const char32_t v1 = w[w.size() - 3];
    if (!is_v_I(d) && v1 == v2 &&
        (v1 == U'a' || v1 == U'e' || v1 == U'o' || v1 == U'u') &&
        !is_v(w[w.size() - 4])) {
      w.erase(w.size() - 2, 1);
    }
  }

  // postlude: drop the shields
  for (auto& c : w) {
    if (c == U'I') c = U'i';
    else if (c == U'Y') c = U'y';
  }
  return detail::utf8_encode(w);
}

}  // namespace notewatch::textnorm
