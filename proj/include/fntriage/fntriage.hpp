#pragma once

#include "fntriage/classifier.hpp"
#include "fntriage/dataset.hpp"
#include "fntriage/error.hpp"
#include "fntriage/eval.hpp"
#include "fntriage/features.hpp"
#include "fntriage/keywords.hpp"
#include "fntriage/model_io.hpp"
#include "fntriage/naive_bayes.hpp"
#include "fntriage/prediction.hpp"
#include "fntriage/random_forest.hpp"
#include "fntriage/tokenizer.hpp"
#include "fntriage/trie.hpp"
