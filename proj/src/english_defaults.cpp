#include "morphlab/phonology.hpp"

namespace morph::phon {

namespace {

// Mirrors data/english.inventory and data/english.features.tsv.
constexpr const char* kEnglishInventory = R"(p
b
t
d
k
g
tʃ
dʒ
m
n
ŋ
f
v
θ
ð
s
z
ʃ
ʒ
h
l
r
w
j
iː
ɪ
eɪ
ɛ
æ
ʌ
ə
ɝ
ɑ
ɔ
oʊ
ʊ
uː
aɪ
aʊ
ɔɪ
)";

constexpr const char* kEnglishFeatures = R"(phoneme	interrupted	continuous	vowel	stop	nasal	fricative	liquid	high	low	front	middle	back	voiced	unvoiced	long	edge
p	+	0	0	+	0	0	0	0	0	+	0	0	0	+	0	0
b	+	0	0	+	0	0	0	0	0	+	0	0	+	0	0	0
t	+	0	0	+	0	0	0	0	0	0	+	0	0	+	0	0
d	+	0	0	+	0	0	0	0	0	0	+	0	+	0	0	0
k	+	0	0	+	0	0	0	0	0	0	0	+	0	+	0	0
g	+	0	0	+	0	0	0	0	0	0	0	+	+	0	0	0
tʃ	+	0	0	+	0	+	0	+	0	0	+	0	0	+	0	0
dʒ	+	0	0	+	0	+	0	+	0	0	+	0	+	0	0	0
m	+	0	0	0	+	0	0	0	0	+	0	0	+	0	0	0
n	+	0	0	0	+	0	0	0	0	0	+	0	+	0	0	0
ŋ	+	0	0	0	+	0	0	0	0	0	0	+	+	0	0	0
f	0	+	0	0	0	+	0	0	0	+	0	0	0	+	0	0
v	0	+	0	0	0	+	0	0	0	+	0	0	+	0	0	0
θ	0	+	0	0	0	+	0	0	0	+	+	0	0	+	0	0
ð	0	+	0	0	0	+	0	0	0	+	+	0	+	0	0	0
s	0	+	0	0	0	+	0	0	0	0	+	0	0	+	0	0
z	0	+	0	0	0	+	0	0	0	0	+	0	+	0	0	0
ʃ	0	+	0	0	0	+	0	+	0	0	+	0	0	+	0	0
ʒ	0	+	0	0	0	+	0	+	0	0	+	0	+	0	0	0
h	0	+	0	0	0	+	0	0	+	0	0	+	0	+	0	0
l	0	+	0	0	0	0	+	0	0	0	+	0	+	0	0	0
r	0	+	0	0	0	0	+	0	0	0	+	+	+	0	0	0
w	0	+	0	0	0	0	+	+	0	+	0	0	+	0	0	0
j	0	+	0	0	0	0	+	+	0	0	+	0	+	0	0	0
iː	0	0	+	0	0	0	0	+	0	+	0	0	+	0	+	0
ɪ	0	0	+	0	0	0	0	+	0	+	0	0	+	0	0	0
eɪ	0	0	+	0	0	0	0	0	0	+	0	0	+	0	+	0
ɛ	0	0	+	0	0	0	0	0	0	+	0	0	+	0	0	0
æ	0	0	+	0	0	0	0	0	+	+	0	0	+	0	0	0
ʌ	0	0	+	0	0	0	0	0	+	0	+	0	+	0	0	0
ə	0	0	+	0	0	0	0	0	0	0	+	0	+	0	0	0
ɝ	0	0	+	0	0	0	+	0	0	0	+	0	+	0	0	0
ɑ	0	0	+	0	0	0	0	0	+	0	0	+	+	0	0	0
ɔ	0	0	+	0	0	0	0	0	0	0	0	+	+	0	0	0
oʊ	0	0	+	0	0	0	0	0	0	0	0	+	+	0	+	0
ʊ	0	0	+	0	0	0	0	+	0	0	0	+	+	0	0	0
uː	0	0	+	0	0	0	0	+	0	0	0	+	+	0	+	0
aɪ	0	0	+	0	0	0	0	0	+	0	+	0	+	0	+	0
aʊ	0	0	+	0	0	0	0	0	+	0	0	+	+	0	+	0
ɔɪ	0	0	+	0	0	0	0	0	0	+	0	+	+	0	+	0
#	0	0	0	0	0	0	0	0	0	0	0	0	0	0	0	+
)";

}  // namespace

const Inventory& Inventory::english() {
  static const Inventory inventory = Inventory::parse(kEnglishInventory);
  return inventory;
}

const FeatureTable& FeatureTable::english() {
  static const FeatureTable table = FeatureTable::parse(kEnglishFeatures, Inventory::english());
  return table;
}

}  // namespace morph::phon
