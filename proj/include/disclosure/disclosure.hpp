#pragma once

#include "disclosure/affinity.hpp"
#include "disclosure/corpus.hpp"
#include "disclosure/csv.hpp"
#include "disclosure/error.hpp"
#include "disclosure/hash.hpp"
#include "disclosure/latex.hpp"
#include "disclosure/manifest.hpp"
#include "disclosure/ngram.hpp"
#include "disclosure/parallel.hpp"
#include "disclosure/scorer.hpp"
#include "disclosure/scorer_cache.hpp"
#include "disclosure/scorer_config.hpp"
#include "disclosure/scorer_http.hpp"
#include "disclosure/scorer_stub.hpp"
#include "disclosure/scoring.hpp"
#include "disclosure/stats.hpp"
#include "disclosure/style.hpp"
#include "disclosure/survey.hpp"
#include "disclosure/text.hpp"
