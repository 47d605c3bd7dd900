// tests/unit/ngram_lm_test.cpp

// Copyright 2026  The sdtk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "sdtk/error.hpp"
#include "sdtk/ngram_lm.hpp"
#include "test_util.hpp"

namespace sdtk {
namespace {

using testing::Gen;

NGramLM parse(const std::string &text) {
  std::istringstream is(text);
  return parse_arpa(is, "toy.arpa");
}

const char *kTiny = R"(
\data\
ngram 1=3
ngram 2=2

\1-grams:
-99	<s>	0
-0.30103	a	0
-0.30103	</s>

\2-grams:
-0.30103	<s> a
-0.30103	a </s>

\end\
)";

const char *kBackoff = R"(
\data\
ngram 1=5
ngram 2=2

\1-grams:
-99	<s>	-0.2
-0.4	a	-0.25
-0.6	b
-0.7	c
-0.5	</s>

\2-grams:
-0.1	<s> a
-0.30103	a b

\end\
)";

TEST(Arpa, TableSizes) {
  NGramLM lm = parse(kTiny);
  EXPECT_EQ(lm.order(), 2);
  EXPECT_EQ(lm.num_ngrams(1), 3u);
  EXPECT_EQ(lm.num_ngrams(2), 2u);
  EXPECT_NE(lm.bos(), NGramLM::kNoWord);
  EXPECT_EQ(lm.unk(), NGramLM::kNoWord);
}

TEST(Arpa, MissingBackoffIsZero) {
  NGramLM lm = parse(kBackoff);
  double lp = 1, bo = 1;
  std::vector<int> b = {lm.word_id("b")};
  ASSERT_TRUE(lm.find(b, &lp, &bo));
  EXPECT_EQ(lp, -0.6);
  EXPECT_EQ(bo, 0.0);
}

TEST(Arpa, Errors) {
  std::string counts = kTiny;
  counts.replace(counts.find("ngram 2=2"), 9, "ngram 2=5");
  EXPECT_THROW(parse(counts), ParseError);
  std::string no_end = kTiny;
  no_end.erase(no_end.find("\\end\\"));
  EXPECT_THROW(parse(no_end), ParseError);
  std::string bad = kTiny;
  bad.replace(bad.find("-0.30103\t<s> a"), 14, "oops\t<s> a");
  try {
    parse(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find("toy.arpa:12"), std::string::npos) << e.what();
  }
  std::string unknown = kBackoff;
  unknown.replace(unknown.find("-0.30103\ta b"), 12, "-0.30103\tq b");
  EXPECT_THROW(parse(unknown), ParseError);
  std::string orphan = kBackoff;
  orphan.replace(orphan.find("ngram 2=2"), 9, "ngram 2=2\nngram 3=1");
  orphan.replace(orphan.find("\\end\\"), 5, "\\3-grams:\n-0.2\tb a c\n\n\\end\\");
  EXPECT_THROW(parse(orphan), ParseError);
  EXPECT_THROW(parse("\\data\\\nngram 1=1\n\n\\1-grams:\n-1\ta\n\n\\end\\\n"), ParseError);
}

TEST(Score, UnigramOnly) {
  NGramLM lm = parse("\\data\\\nngram 1=3\n\\1-grams:\n-0.5\tx\n-0.25\ty\n-1\t</s>\n\\end\\\n");
  EXPECT_EQ(lm.score_word(lm.begin_state(), "x").first, -0.5);
  EXPECT_EQ(lm.score_word(lm.begin_state(), "y").first, -0.25);
}

TEST(Score, ExplicitAndBackedOff) {
  NGramLM lm = parse(kBackoff);
  LmState a = lm.score_word(lm.begin_state(), "a").second;
  EXPECT_EQ(a.history, (std::vector<int>{lm.word_id("a")}));
  EXPECT_DOUBLE_EQ(lm.score_word(a, "b").first, -0.30103);
  EXPECT_DOUBLE_EQ(lm.score_word(a, "c").first, -0.25 + -0.7);
  LmState b = lm.score_word(a, "b").second;
  EXPECT_DOUBLE_EQ(lm.score_word(b, "c").first, -0.7);
}

TEST(Score, OutOfVocabulary) {
  NGramLM lm = parse(kBackoff);
  auto [lp, next] = lm.score_word(lm.begin_state(), "zebra");
  EXPECT_EQ(lp, -10.0);
  EXPECT_TRUE(next.history.empty());
  lm.set_oov_floor(-7.0);
  EXPECT_EQ(lm.score_word(lm.begin_state(), "zebra").first, -7.0);

  std::string with_unk = kBackoff;
  with_unk.replace(with_unk.find("ngram 1=5"), 9, "ngram 1=6");
  with_unk.replace(with_unk.find("-0.7\tc"), 6, "-0.7\tc\n-1.5\t<unk>");
  NGramLM u = parse(with_unk);
  EXPECT_DOUBLE_EQ(u.score_word(u.begin_state(), "zebra").first, -0.2 + -1.5);
}

TEST(Perplexity, HandComputed) {
  NGramLM lm = parse(kTiny);
  std::vector<std::vector<std::string>> corpus = {{"a"}};
  EXPECT_NEAR(perplexity(lm, corpus), 2.0, 1e-6);
  EXPECT_THROW(perplexity(lm, {}), ValidationError);
}

std::string uniform_arpa(size_t v) {
  double lp = std::log10(1.0 / static_cast<double>(v));
  std::string s = fmt::format("\\data\\\nngram 1={}\n\\1-grams:\n-99\t<s>\n", v + 1);
  for (size_t i = 0; i + 1 < v; ++i) s += fmt::format("{:.17g}\tw{}\n", lp, i);
  s += fmt::format("{:.17g}\t</s>\n\\end\\\n", lp);
  return s;
}

TEST(Perplexity, UniformEqualsVocabularySize) {
  std::vector<std::vector<std::string>> corpus = {{"w1", "w2"}, {}, {"w0", "w0", "w2", "w1"}};
  EXPECT_EQ(perplexity(parse(uniform_arpa(10)), corpus), 10.0);
  EXPECT_NEAR(perplexity(parse(uniform_arpa(4)), corpus), 4.0, 1e-12);
}

// Random trigram model with Katz backoff weights chosen so that every
// context distributes exactly unit mass. Scored independently below.
struct ToyKatz {
  using Key = std::vector<std::string>;
  std::vector<std::string> predictable;  // words and </s>
  std::map<Key, std::pair<double, double>> grams;  // prob, backoff (log10)

  double bo(const Key &k) const {
    auto it = grams.find(k);
    return it == grams.end() ? 0.0 : it->second.second;
  }
  // log10 P(w | h) with h the last n-1 words, backing off as needed.
  double score(Key h, const std::string &w) const {
    Key full = h;
    full.push_back(w);
    auto it = grams.find(full);
    if (it != grams.end()) return it->second.first;
    if (h.empty()) return -10.0;
    Key shorter(h.begin() + 1, h.end());
    return bo(h) + score(shorter, w);
  }
  std::string arpa() const {
    std::map<size_t, std::vector<std::string>> lines;
    for (const auto &[k, v] : grams) {
      std::string words;
      for (size_t i = 0; i < k.size(); ++i) words += (i ? " " : "") + k[i];
      std::string line = fmt::format("{:.17g}\t{}", v.first, words);
      if (k.size() < 3 && v.second != 0.0) line += fmt::format("\t{:.17g}", v.second);
      lines[k.size()].push_back(line);
    }
    std::string s = "\\data\\\n";
    for (auto &[n, l] : lines) s += fmt::format("ngram {}={}\n", n, l.size());
    for (auto &[n, l] : lines) {
      s += fmt::format("\n\\{}-grams:\n", n);
      for (auto &x : l) s += x + "\n";
    }
    return s + "\n\\end\\\n";
  }
};

ToyKatz make_toy(Gen &g, size_t vocab) {
  ToyKatz t;
  for (size_t i = 0; i < vocab; ++i) t.predictable.push_back("w" + std::to_string(i));
  t.predictable.push_back("</s>");
  auto uni = g.simplex(t.predictable.size());
  for (size_t i = 0; i < uni.size(); ++i) t.grams[{t.predictable[i]}] = {std::log10(uni[i]), 0.0};
  t.grams[{"<s>"}] = {-99.0, 0.0};

  // Gives context h explicit entries for a strict subset of the words.
  auto fill = [&](const ToyKatz::Key &h) {
    ToyKatz::Key lower(h.begin() + 1, h.end());
    std::vector<std::string> chosen;
    for (const auto &w : t.predictable)
      if (g.uniform() < 0.5) chosen.push_back(w);
    if (chosen.empty() || chosen.size() == t.predictable.size()) return;
    double mass = g.uniform(0.3, 0.9), lower_mass = 0.0;
    for (const auto &w : chosen) lower_mass += std::pow(10.0, t.score(lower, w));
    auto split = g.simplex(chosen.size());
    for (size_t i = 0; i < chosen.size(); ++i) {
      ToyKatz::Key k = h;
      k.push_back(chosen[i]);
      t.grams[k] = {std::log10(mass * split[i]), 0.0};
    }
    t.grams[h].second = std::log10((1.0 - mass) / (1.0 - lower_mass));
  };
  std::vector<std::string> contexts = t.predictable;
  contexts.back() = "<s>";
  for (const auto &h : contexts) fill({h});
  std::vector<ToyKatz::Key> bigrams;
  for (const auto &[k, v] : t.grams)
    if (k.size() == 2 && k[1] != "</s>") bigrams.push_back(k);
  for (const auto &k : bigrams)
    if (g.coin()) fill(k);
  return t;
}

TEST(KatzProperty, BackoffMassSumsToOne) {
  Gen g(31);
  for (int trial = 0; trial < 20; ++trial) {
    ToyKatz toy = make_toy(g, 3 + g.below(5));
    NGramLM lm = parse(toy.arpa());
    std::vector<LmState> contexts;
    for (const auto &[k, v] : toy.grams) {
      if (k.size() == 3 || k.back() == "</s>") continue;
      LmState s;
      for (const auto &w : k) s.history.push_back(lm.word_id(w));
      contexts.push_back(s);
    }
    for (const auto &s : contexts) {
      double total = 0;
      for (const auto &w : toy.predictable) total += std::pow(10.0, lm.score_word(s, w).first);
      EXPECT_NEAR(total, 1.0, 1e-3) << "trial " << trial;
    }
  }
}

TEST(KatzProperty, StatesMatchExplicitHistories) {
  Gen g(32);
  for (int trial = 0; trial < 20; ++trial) {
    ToyKatz toy = make_toy(g, 3 + g.below(5));
    NGramLM lm = parse(toy.arpa());
    for (int sent = 0; sent < 20; ++sent) {
      std::vector<std::string> words(g.below(8));
      for (auto &w : words) w = toy.predictable[g.below(toy.predictable.size() - 1)];
      LmState s = lm.begin_state();
      std::vector<std::string> hist = {"<s>"};
      double total = 0, oracle_total = 0;
      for (const auto &w : words) {
        auto [lp, next] = lm.score_word(s, w);
        ToyKatz::Key h(hist.end() - std::min<long>(2, static_cast<long>(hist.size())), hist.end());
        double want = toy.score(h, w);
        EXPECT_NEAR(lp, want, 1e-12) << "trial " << trial;
        total += lp;
        oracle_total += want;
        s = std::move(next);
        hist.push_back(w);
      }
      ToyKatz::Key h(hist.end() - std::min<long>(2, static_cast<long>(hist.size())), hist.end());
      oracle_total += toy.score(h, "</s>");
      EXPECT_NEAR(lm.sentence_log10prob(words), oracle_total, 1e-9);
    }
  }
}

TEST(KatzProperty, DumpReloadKeepsScores) {
  Gen g(33);
  ToyKatz toy = make_toy(g, 6);
  NGramLM lm = parse(toy.arpa());
  std::ostringstream os;
  lm.write_arpa(os);
  NGramLM back = parse(os.str());
  EXPECT_EQ(back.num_ngrams(1), lm.num_ngrams(1));
  EXPECT_EQ(back.num_ngrams(3), lm.num_ngrams(3));
  for (int q = 0; q < 1000; ++q) {
    LmState s = lm.begin_state(), t = back.begin_state();
    size_t n = g.below(4);
    for (size_t i = 0; i <= n; ++i) {
      std::string w = toy.predictable[g.below(toy.predictable.size() - 1)];
      if (i == n) w = toy.predictable[g.below(toy.predictable.size())];
      auto a = lm.score_word(s, w);
      auto b = back.score_word(t, w);
      ASSERT_EQ(a.first, b.first) << "query " << q;
      s = a.second;
      t = b.second;
    }
  }
}

}  // namespace
}  // namespace sdtk
