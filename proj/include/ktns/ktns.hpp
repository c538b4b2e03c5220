#pragma once

#include "ktns/bilinear.hpp"
#include "ktns/brute_force.hpp"
#include "ktns/counterexample.hpp"
#include "ktns/field.hpp"
#include "ktns/grid.hpp"
#include "ktns/hardy.hpp"
#include "ktns/io.hpp"
#include "ktns/kernel_estimates.hpp"
#include "ktns/probing.hpp"
#include "ktns/report.hpp"
#include "ktns/rng.hpp"
#include "ktns/solver.hpp"
#include "ktns/symbol_ops.hpp"
#include "ktns/tent_norms.hpp"
