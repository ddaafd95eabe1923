// SPDX-License-Identifier: Apache-2.0
#ifndef HSL_HSL_HPP
#define HSL_HSL_HPP

#include "hsl/adaptive.hpp"
#include "hsl/cli.hpp"
#include "hsl/coeffs.hpp"
#include "hsl/core.hpp"
#include "hsl/covfactor.hpp"
#include "hsl/innovations.hpp"
#include "hsl/io.hpp"
#include "hsl/rng.hpp"
#include "hsl/rules.hpp"
#include "hsl/simulate.hpp"
#include "hsl/stoptime.hpp"

#endif
