#pragma once

#include "formreg/classify.hpp"
#include "formreg/error.hpp"
#include "formreg/numkit.hpp"
#include "formreg/regengine.hpp"
#include "formreg/synth.hpp"
