#pragma once

#include "densitometer/error.hpp"
#include "densitometer/logreal.hpp"
#include "densitometer/weights.hpp"
#include "densitometer/interval.hpp"
#include "densitometer/dilation.hpp"
#include "densitometer/auxfn.hpp"
#include "densitometer/setmodel.hpp"
#include "densitometer/scan.hpp"
