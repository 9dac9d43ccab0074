// Copyright 2026 The etlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "etlab/typo.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace etlab {
namespace {

const TypoTables& Tables() {
  static const TypoTables t = TypoTables::Builtin();
  return t;
}

std::vector<std::string> Outcomes(std::string_view token, TypoOp op) {
  std::vector<std::string> out;
  for (const auto& e : CandidateEdits(token, op, Tables())) {
    out.push_back(e.ApplyTo(token));
  }
  return out;
}

TEST(TypoTablesTest, BuiltinIsValidAndSized) {
  EXPECT_NO_THROW(Tables().Validate());
  EXPECT_GE(Tables().mistype.size(), 20u);
  EXPECT_GE(Tables().pronounce.size(), 20u);
  EXPECT_GE(Tables().wiki_typos.size(), 20u);
}

TEST(TypoTablesTest, ValidateRejectsSelfMapping) {
  TypoTables t = Tables();
  t.mistype["q"] = {"q"};
  EXPECT_THROW(t.Validate(), InvalidArgument);
  t = Tables();
  t.keyboard_adjacency.erase("z");
  EXPECT_THROW(t.Validate(), InvalidArgument);
}

TEST(TypoOpTest, MistypeOh) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    EXPECT_EQ(ApplyTypo("oh", TypoOp::kMistype, Tables(), rng), "0h");
  }
}

TEST(TypoOpTest, PronounceEgg) {
  const auto outs = Outcomes("egg", TypoOp::kPronounce);
  EXPECT_NE(std::find(outs.begin(), outs.end(), "agg"), outs.end());
}

TEST(TypoOpTest, Primitives) {
  EXPECT_EQ(SwapAt("read", 1), "raed");
  EXPECT_EQ(DeleteAt("cat", 1), "ct");
  EXPECT_EQ(InsertAfter("cat", 0, 'x'), "cxat");
}

TEST(TypoOpTest, InapplicableSignalled) {
  Rng rng(0);
  EXPECT_FALSE(ApplyTypo("a", TypoOp::kDeletion, Tables(), rng));
  EXPECT_FALSE(ApplyTypo("a", TypoOp::kSwap, Tables(), rng));
  EXPECT_FALSE(ApplyTypo("aa", TypoOp::kSwap, Tables(), rng));
  EXPECT_FALSE(ApplyTypo("zzqx", TypoOp::kReplaceW, Tables(), rng));
}

TEST(TypoOpTest, ReplaceWUsesWikiList) {
  const auto& [word, typos] = *Tables().wiki_typos.begin();
  Rng rng(1);
  const auto r = ApplyTypo(word, TypoOp::kReplaceW, Tables(), rng);
  ASSERT_TRUE(r);
  EXPECT_NE(std::find(typos.begin(), typos.end(), *r), typos.end());
}

TEST(TypoOpTest, PreservesLeadingCapital) {
  Rng rng(0);
  EXPECT_EQ(ApplyTypo("Oh", TypoOp::kMistype, Tables(), rng), "0h");
  const auto outs = Outcomes("Egg", TypoOp::kPronounce);
  EXPECT_NE(std::find(outs.begin(), outs.end(), "Agg"), outs.end());
}

// Length and multiset contracts of each operator, over many tokens.
TEST(TypoOpTest, OperatorSoundness) {
  const std::vector<std::string> words = {"great", "terrible", "movie", "phone",
                                          "the", "Seattle", "quality", "egg",
                                          "oh", "x1", "received", "because"};
  for (const auto& w : words) {
    for (TypoOp op : kAllTypoOps) {
      for (uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        const auto r = ApplyTypo(w, op, Tables(), rng);
        if (!r) continue;
        EXPECT_NE(*r, w);
        EXPECT_TRUE(IsSingleApplication(w, *r, op, Tables())) << w << " " << *r;
        switch (op) {
          case TypoOp::kInsertion:
            EXPECT_EQ(r->size(), w.size() + 1);
            break;
          case TypoOp::kDeletion:
            EXPECT_EQ(r->size() + 1, w.size());
            break;
          case TypoOp::kSwap: {
            std::string a = w, b = *r;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            EXPECT_EQ(a, b);
            break;
          }
          default:
            break;
        }
      }
    }
  }
}

TEST(TypoOpTest, DeterministicGivenSeed) {
  for (TypoOp op : kAllTypoOps) {
    Rng a(5), b(5);
    EXPECT_EQ(ApplyTypo("because", op, Tables(), a),
              ApplyTypo("because", op, Tables(), b));
  }
}

TEST(TypoOpTest, IsSingleApplicationRejectsDoubleEdits) {
  EXPECT_FALSE(IsSingleApplication("cat", "t", TypoOp::kDeletion, Tables()));
  EXPECT_FALSE(IsSingleApplication("cat", "cat", TypoOp::kDeletion, Tables()));
  EXPECT_TRUE(IsSingleApplication("read", "raed", TypoOp::kSwap, Tables()));
}

TEST(TypoOpTest, ParseNames) {
  EXPECT_EQ(ParseTypoOps("all").size(), 6u);
  EXPECT_EQ(ParseTypoOps("swap,deletion,swap"),
            (std::vector<TypoOp>{TypoOp::kSwap, TypoOp::kDeletion}));
  for (TypoOp op : kAllTypoOps) EXPECT_EQ(ParseTypoOp(TypoOpName(op)), op);
  EXPECT_THROW(ParseTypoOps("typo"), InvalidArgument);
}

TEST(TypoMapTest, LoadsTsv) {
  const auto path = std::filesystem::path(testing::TempDir()) / "wiki.tsv";
  std::ofstream(path) << "# comment\n\nAcross\tacros,accross\nteh\tthe\n";
  const TypoMap m = LoadTypoMap(path.string());
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.at("across"), (std::vector<std::string>{"acros", "accross"}));
  const auto bad = std::filesystem::path(testing::TempDir()) / "bad.tsv";
  std::ofstream(bad) << "no tab here\n";
  EXPECT_THROW(LoadTypoMap(bad.string()), ParseError);
}

}  // namespace
}  // namespace etlab
