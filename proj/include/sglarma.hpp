#pragma once

#include "sglarma/errors.hpp"
#include "sglarma/rng.hpp"
#include "sglarma/model.hpp"
#include "sglarma/derivatives.hpp"
#include "sglarma/glm.hpp"
#include "sglarma/estimation.hpp"
#include "sglarma/lasso.hpp"
#include "sglarma/metrics.hpp"
#include "sglarma/selection.hpp"
#include "sglarma/simulate.hpp"
