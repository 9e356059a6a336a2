#pragma once

// Convenience umbrella header.

#include "essaykit/corpus.hpp"
#include "essaykit/corpus_io.hpp"
#include "essaykit/corruption.hpp"
#include "essaykit/metrics.hpp"
#include "essaykit/rng.hpp"
#include "essaykit/split.hpp"
#include "essaykit/standardize.hpp"
#include "essaykit/text.hpp"
