#pragma once

#include "maxlab/closure_det.hpp"
#include "maxlab/closure_nondet.hpp"
#include "maxlab/constructions.hpp"
#include "maxlab/encoding.hpp"
#include "maxlab/errors.hpp"
#include "maxlab/families.hpp"
#include "maxlab/finite_character.hpp"
#include "maxlab/oracles.hpp"
#include "maxlab/zorn.hpp"
