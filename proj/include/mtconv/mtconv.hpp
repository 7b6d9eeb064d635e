#pragma once

#include "mtconv/equidist.hpp"
#include "mtconv/f2matrix.hpp"
#include "mtconv/generator.hpp"
#include "mtconv/known_answer.hpp"
#include "mtconv/linear_model.hpp"
#include "mtconv/pvalues.hpp"
#include "mtconv/relations.hpp"
#include "mtconv/stattests.hpp"
#include "mtconv/streams.hpp"
