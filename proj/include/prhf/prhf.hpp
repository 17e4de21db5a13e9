#pragma once

#include "prhf/config.hpp"
#include "prhf/field.hpp"
#include "prhf/grid.hpp"
#include "prhf/io.hpp"
#include "prhf/localization.hpp"
#include "prhf/localization_lab.hpp"
#include "prhf/multiindex.hpp"
#include "prhf/operators.hpp"
#include "prhf/probes.hpp"
#include "prhf/quadrature.hpp"
#include "prhf/regularity.hpp"
#include "prhf/rng.hpp"
#include "prhf/run.hpp"
#include "prhf/scf.hpp"
#include "prhf/yukawa.hpp"
