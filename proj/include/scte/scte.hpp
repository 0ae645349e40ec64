#pragma once

#include "scte/ate.hpp"
#include "scte/csv.hpp"
#include "scte/datagen.hpp"
#include "scte/errors.hpp"
#include "scte/experiments.hpp"
#include "scte/gsw.hpp"
#include "scte/ite.hpp"
#include "scte/linalg.hpp"
#include "scte/oracle.hpp"
#include "scte/rng.hpp"
