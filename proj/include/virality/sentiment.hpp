#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "virality/record.hpp"

namespace virality {

// Document sentiment scoring, text x language_code -> [0, 1]. Implementations
// must be deterministic for a fixed version() and defined for all 18
// supported language codes.
class SentimentProvider {
 public:
  virtual ~SentimentProvider() = default;
  virtual double score(std::string_view text, std::string_view language_code) const = 0;
  virtual std::string version() const = 0;
};

namespace detail {

struct LexiconEntry {
  std::string_view word;
  int sign;  // +1 positive, -1 negative
};

struct LanguageLexicon {
  std::string_view code;
  std::array<LexiconEntry, 8> entries;
};

// Small fixed lexicons, four positive and four negative words per language.
// A stub standing in for the hosted scoring service; scores are reproducible
// because the table is frozen per provider version.
inline constexpr std::array<LanguageLexicon, 18> kLexicons = {{
    {"ar", {{{"رائع", 1}, {"جميل", 1}, {"ممتاز", 1}, {"سعيد", 1},
             {"سيئ", -1}, {"فظيع", -1}, {"حزين", -1}, {"مروع", -1}}}},
    {"da", {{{"fantastisk", 1}, {"dejlig", 1}, {"glad", 1}, {"perfekt", 1},
             {"forfærdelig", -1}, {"dårlig", -1}, {"trist", -1}, {"elendig", -1}}}},
    {"de", {{{"wunderbar", 1}, {"toll", 1}, {"glücklich", 1}, {"perfekt", 1},
             {"schrecklich", -1}, {"schlecht", -1}, {"traurig", -1}, {"furchtbar", -1}}}},
    {"el", {{{"υπέροχο", 1}, {"ωραίο", 1}, {"τέλειο", 1}, {"χαρούμενος", 1},
             {"απαίσιο", -1}, {"κακό", -1}, {"λυπημένος", -1}, {"φρικτό", -1}}}},
    {"en", {{{"great", 1}, {"love", 1}, {"happy", 1}, {"wonderful", 1},
             {"awful", -1}, {"hate", -1}, {"sad", -1}, {"terrible", -1}}}},
    {"es", {{{"genial", 1}, {"maravilloso", 1}, {"feliz", 1}, {"perfecto", 1},
             {"horrible", -1}, {"malo", -1}, {"triste", -1}, {"terrible", -1}}}},
    {"fi", {{{"mahtava", 1}, {"ihana", 1}, {"onnellinen", 1}, {"täydellinen", 1},
             {"kamala", -1}, {"huono", -1}, {"surullinen", -1}, {"hirveä", -1}}}},
    {"fr", {{{"magnifique", 1}, {"génial", 1}, {"heureux", 1}, {"parfait", 1},
             {"horrible", -1}, {"mauvais", -1}, {"triste", -1}, {"affreux", -1}}}},
    {"it", {{{"meraviglioso", 1}, {"fantastico", 1}, {"felice", 1}, {"perfetto", 1},
             {"orribile", -1}, {"cattivo", -1}, {"triste", -1}, {"terribile", -1}}}},
    {"ja", {{{"素晴らしい", 1}, {"最高", 1}, {"嬉しい", 1}, {"楽しい", 1},
             {"最悪", -1}, {"ひどい", -1}, {"悲しい", -1}, {"つらい", -1}}}},
    {"nl", {{{"geweldig", 1}, {"prachtig", 1}, {"blij", 1}, {"perfect", 1},
             {"verschrikkelijk", -1}, {"slecht", -1}, {"verdrietig", -1}, {"vreselijk", -1}}}},
    {"no", {{{"fantastisk", 1}, {"herlig", 1}, {"glad", 1}, {"perfekt", 1},
             {"forferdelig", -1}, {"dårlig", -1}, {"trist", -1}, {"grusom", -1}}}},
    {"pl", {{{"wspaniały", 1}, {"świetny", 1}, {"szczęśliwy", 1}, {"doskonały", 1},
             {"okropny", -1}, {"zły", -1}, {"smutny", -1}, {"straszny", -1}}}},
    {"pt", {{{"maravilhoso", 1}, {"ótimo", 1}, {"feliz", 1}, {"perfeito", 1},
             {"horrível", -1}, {"ruim", -1}, {"triste", -1}, {"terrível", -1}}}},
    {"ru", {{{"прекрасно", 1}, {"отлично", 1}, {"счастливый", 1}, {"замечательно", 1},
             {"ужасно", -1}, {"плохо", -1}, {"грустный", -1}, {"отвратительно", -1}}}},
    {"sv", {{{"underbar", 1}, {"härlig", 1}, {"glad", 1}, {"perfekt", 1},
             {"hemsk", -1}, {"dålig", -1}, {"ledsen", -1}, {"fruktansvärd", -1}}}},
    {"tr", {{{"harika", 1}, {"güzel", 1}, {"mutlu", 1}, {"mükemmel", 1},
             {"berbat", -1}, {"kötü", -1}, {"üzgün", -1}, {"korkunç", -1}}}},
    {"zh", {{{"好", 1}, {"棒", 1}, {"开心", 1}, {"精彩", 1},
             {"坏", -1}, {"糟糕", -1}, {"难过", -1}, {"可怕", -1}}}},
}};

inline const LanguageLexicon* find_lexicon(std::string_view code) {
  for (const auto& lex : kLexicons) {
    if (lex.code == code) return &lex;
  }
  return nullptr;
}

inline std::size_t count_occurrences(std::string_view text, std::string_view word) {
  std::size_t n = 0, pos = 0;
  while ((pos = text.find(word, pos)) != std::string_view::npos) {
    ++n;
    pos += word.size();
  }
  return n;
}

}  // namespace detail

// Signed-lexicon average mapped to [0, 1]: 1.0 all-positive matches, 0.0
// all-negative, 0.5 neutral or no match. ASCII text is lowercased before
// matching; lexicon entries are matched as substrings, which also covers
// languages written without word separators.
class LexiconSentiment final : public SentimentProvider {
 public:
  double score(std::string_view text, std::string_view language_code) const override {
    const detail::LanguageLexicon* lex = detail::find_lexicon(language_code);
    if (lex == nullptr) return 0.5;
    std::string lowered(text);
    for (char& c : lowered) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    long signed_sum = 0;
    std::size_t matches = 0;
    for (const auto& entry : lex->entries) {
      const std::size_t n = detail::count_occurrences(lowered, entry.word);
      matches += n;
      signed_sum += entry.sign * static_cast<long>(n);
    }
    if (matches == 0) return 0.5;
    const double mean_sign = static_cast<double>(signed_sum) / static_cast<double>(matches);
    return 0.5 * (mean_sign + 1.0);
  }

  std::string version() const override { return "lexicon-v1"; }

  // Exposed so the synthetic generator can emit text with a known polarity.
  static std::vector<std::string_view> words(std::string_view language_code, int sign) {
    std::vector<std::string_view> out;
    if (const auto* lex = detail::find_lexicon(language_code)) {
      for (const auto& e : lex->entries) {
        if (e.sign == sign) out.push_back(e.word);
      }
    }
    return out;
  }
};

}  // namespace virality
