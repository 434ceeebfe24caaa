#pragma once

#include "tw/common.hpp"
#include "tw/constants.hpp"
#include "tw/corona.hpp"
#include "tw/disk.hpp"
#include "tw/grid.hpp"
#include "tw/haar.hpp"
#include "tw/instances.hpp"
#include "tw/kernels.hpp"
#include "tw/measure.hpp"
#include "tw/suite.hpp"
