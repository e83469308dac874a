#pragma once

#include "edc/budget.hpp"
#include "edc/ck_scaling.hpp"
#include "edc/codecs.hpp"
#include "edc/description.hpp"
#include "edc/dimension.hpp"
#include "edc/experiments.hpp"
#include "edc/hausdorff.hpp"
#include "edc/ifs.hpp"
#include "edc/json_io.hpp"
#include "edc/packing.hpp"
#include "edc/point_set.hpp"
#include "edc/random_cantor.hpp"
#include "edc/rational.hpp"
