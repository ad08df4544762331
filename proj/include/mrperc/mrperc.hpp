#pragma once

#include "mrperc/charpoly.hpp"
#include "mrperc/matrix.hpp"
#include "mrperc/matrix_io.hpp"
#include "mrperc/model.hpp"
#include "mrperc/simulate.hpp"
#include "mrperc/spectral.hpp"
#include "mrperc/sweep.hpp"
#include "mrperc/threshold.hpp"
#include "mrperc/typespace.hpp"
