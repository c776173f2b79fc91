#pragma once

#include "titledup/annotation.hpp"
#include "titledup/corpus.hpp"
#include "titledup/distance.hpp"
#include "titledup/embedding.hpp"
#include "titledup/error.hpp"
#include "titledup/evaluation.hpp"
#include "titledup/language.hpp"
#include "titledup/pairing.hpp"
#include "titledup/text.hpp"
