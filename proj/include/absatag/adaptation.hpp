#ifndef ABSATAG_ADAPTATION_HPP
#define ABSATAG_ADAPTATION_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "absatag/corpus.hpp"
#include "absatag/model.hpp"

namespace absatag {

// WEIGHTED: union of SRC and TGT where SRC sentences carry an embedding
// input scale of w; the union is shuffled once with the seed. SRC sentences
// keep a domain flag so fold construction can pin them to the training part.
std::vector<Sentence> weighted_union(std::span<const Sentence> src,
                                     std::span<const Sentence> tgt, double w,
                                     std::uint64_t seed);

// PRED: attaches an AE-mode source model's predicted IOB tag to every TGT
// token (the pred_iob field); tokens, spans and gold labels are untouched.
std::vector<Sentence> pred_augment(Model& src_model,
                                   std::span<const Sentence> tgt);

}  // namespace absatag

#endif
