#pragma once

#include "rlrepro/special/gamma.hpp"
#include "rlrepro/special/kolmogorov.hpp"
#include "rlrepro/special/normal.hpp"
#include "rlrepro/special/owens_t.hpp"
