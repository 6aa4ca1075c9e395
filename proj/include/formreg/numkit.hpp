#pragma once

#include "formreg/numkit/matrix.hpp"
#include "formreg/numkit/ops.hpp"
#include "formreg/numkit/rank.hpp"
#include "formreg/numkit/scalar.hpp"
