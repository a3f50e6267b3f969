#pragma once

#include "kryreg/dataset.hpp"
#include "kryreg/dense.hpp"
#include "kryreg/diagnostics.hpp"
#include "kryreg/error.hpp"
#include "kryreg/kernel.hpp"
#include "kryreg/krylov/cg.hpp"
#include "kryreg/krylov/config.hpp"
#include "kryreg/krylov/fcg.hpp"
#include "kryreg/krylov/givens.hpp"
#include "kryreg/krylov/gmres.hpp"
#include "kryreg/krylov/operator.hpp"
#include "kryreg/krylov/preconditioners.hpp"
#include "kryreg/krylov/trace.hpp"
#include "kryreg/regression.hpp"
#include "kryreg/solve.hpp"
#include "kryreg/types.hpp"
