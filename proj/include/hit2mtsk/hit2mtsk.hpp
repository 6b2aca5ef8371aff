#pragma once

#include "hit2mtsk/error.hpp"
#include "hit2mtsk/it2_fuzzy.hpp"
#include "hit2mtsk/polynomial.hpp"
#include "hit2mtsk/rule.hpp"
#include "hit2mtsk/dataset.hpp"
#include "hit2mtsk/dominance.hpp"
#include "hit2mtsk/inference.hpp"
#include "hit2mtsk/universe.hpp"
#include "hit2mtsk/aco.hpp"
#include "hit2mtsk/pipeline.hpp"
#include "hit2mtsk/evalx.hpp"
#include "hit2mtsk/serialize.hpp"
