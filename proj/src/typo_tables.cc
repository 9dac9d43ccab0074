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

// Built-in typo resources. Each can be replaced from a TSV file.

#include "etlab/typo.h"

namespace etlab {

TypoTables TypoTables::Builtin() {
  TypoTables t;
  t.keyboard_adjacency = {
      {"q", {"w", "a", "1", "2"}},      {"w", {"q", "e", "a", "s", "2", "3"}},
      {"e", {"w", "r", "s", "d", "3", "4"}}, {"r", {"e", "t", "d", "f", "4", "5"}},
      {"t", {"r", "y", "f", "g", "5", "6"}}, {"y", {"t", "u", "g", "h", "6", "7"}},
      {"u", {"y", "i", "h", "j", "7", "8"}}, {"i", {"u", "o", "j", "k", "8", "9"}},
      {"o", {"i", "p", "k", "l", "9", "0"}}, {"p", {"o", "l", "0"}},
      {"a", {"q", "w", "s", "z"}},      {"s", {"a", "d", "w", "e", "z", "x"}},
      {"d", {"s", "f", "e", "r", "x", "c"}}, {"f", {"d", "g", "r", "t", "c", "v"}},
      {"g", {"f", "h", "t", "y", "v", "b"}}, {"h", {"g", "j", "y", "u", "b", "n"}},
      {"j", {"h", "k", "u", "i", "n", "m"}}, {"k", {"j", "l", "i", "o", "m"}},
      {"l", {"k", "o", "p"}},           {"z", {"a", "s", "x"}},
      {"x", {"z", "c", "s", "d"}},      {"c", {"x", "v", "d", "f"}},
      {"v", {"c", "b", "f", "g"}},      {"b", {"v", "n", "g", "h"}},
      {"n", {"b", "m", "h", "j"}},      {"m", {"n", "j", "k"}},
      {"1", {"2", "q"}},                {"2", {"1", "3", "q", "w"}},
      {"3", {"2", "4", "w", "e"}},      {"4", {"3", "5", "e", "r"}},
      {"5", {"4", "6", "r", "t"}},      {"6", {"5", "7", "t", "y"}},
      {"7", {"6", "8", "y", "u"}},      {"8", {"7", "9", "u", "i"}},
      {"9", {"8", "0", "i", "o"}},      {"0", {"9", "o", "p"}},
  };
  // Look-alike substitutions; 'h' has none.
  t.mistype = {
      {"o", {"0"}},  {"l", {"1"}},       {"i", {"1", "l"}}, {"e", {"3"}},
      {"a", {"4"}},  {"s", {"5"}},       {"t", {"7"}},      {"b", {"8", "6"}},
      {"g", {"9", "q"}}, {"z", {"2"}},   {"q", {"9"}},      {"m", {"rn"}},
      {"w", {"vv"}}, {"d", {"cl"}},      {"u", {"v"}},      {"v", {"u"}},
      {"c", {"e"}},  {"n", {"m"}},       {"r", {"n"}},      {"y", {"v"}},
      {"k", {"lc"}}, {"j", {"i"}},       {"f", {"t"}},      {"p", {"q"}},
      {"0", {"o"}},  {"1", {"l"}},       {"3", {"e"}},      {"5", {"s"}},
  };
  t.pronounce = {
      {"e", {"a"}},     {"a", {"e"}},     {"ph", {"f"}},    {"f", {"ph"}},
      {"ck", {"k"}},    {"c", {"k"}},     {"k", {"c"}},     {"ee", {"ea"}},
      {"ea", {"ee"}},   {"oo", {"u"}},    {"ou", {"ow"}},   {"ow", {"ou"}},
      {"s", {"z"}},     {"z", {"s"}},     {"tion", {"shun"}}, {"i", {"y"}},
      {"y", {"i"}},     {"th", {"d"}},    {"v", {"f"}},     {"x", {"ks"}},
      {"qu", {"kw"}},   {"ai", {"ay"}},   {"ay", {"ai"}},   {"er", {"ur"}},
      {"ir", {"ur"}},   {"wh", {"w"}},    {"kn", {"n"}},    {"ough", {"uff"}},
      {"ie", {"ei"}},   {"ei", {"ie"}},
  };
  t.wiki_typos = {
      {"the", {"teh", "th"}},
      {"and", {"adn", "nad"}},
      {"with", {"wiht", "whit"}},
      {"that", {"taht", "tht"}},
      {"you", {"yuo", "yu"}},
      {"what", {"waht", "wat"}},
      {"which", {"whcih", "wich"}},
      {"their", {"thier"}},
      {"because", {"becuase", "beacuse"}},
      {"really", {"realy", "relly"}},
      {"definitely", {"definately", "definitly"}},
      {"separate", {"seperate"}},
      {"receive", {"recieve"}},
      {"believe", {"beleive", "belive"}},
      {"beginning", {"begining"}},
      {"until", {"untill"}},
      {"tomorrow", {"tommorow", "tomorow"}},
      {"friend", {"freind"}},
      {"great", {"graet", "grate"}},
      {"good", {"goood", "god"}},
      {"movie", {"moive", "movei"}},
      {"service", {"sevice", "servise"}},
      {"government", {"goverment"}},
      {"occurred", {"occured"}},
      {"necessary", {"neccessary", "necessery"}},
      {"address", {"adress"}},
      {"restaurant", {"restaraunt", "resturant"}},
      {"experience", {"experiance"}},
      {"recommend", {"reccomend", "recomend"}},
      {"excellent", {"excelent"}},
      {"terrible", {"terible"}},
      {"business", {"buisness", "bussiness"}},
      {"probably", {"probaly"}},
      {"disappointed", {"dissapointed"}},
  };
  return t;
}

}  // namespace etlab
