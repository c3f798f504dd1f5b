#pragma once

#include <vector>

#include "fnd/text.hpp"

namespace fnd {

// Assembled model input for one record.
struct FeatureVector {
  std::vector<TokenSequence> text_channels;  // news_text, tweet_text
  std::vector<double> aux;                   // z-scored numerics, dates, sentiment
};

}  // namespace fnd
