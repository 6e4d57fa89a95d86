#pragma once

#include <span>

#include "conj1d/expr.hpp"

namespace conj1d::kernels {

// Batch evaluation of a compiled expression program over a grid of x values.
// The scalar kernel is the reference; the AVX2 kernel performs the identical
// sequence of IEEE operations four lanes at a time, so both produce bit-equal
// results. The active kernel is picked once at startup from CPUID.

void eval_batch_scalar(const ExprProgram& prog, double mu, std::span<const double> xs,
                       std::span<double> out);

#if defined(__x86_64__) || defined(_M_X64)
void eval_batch_avx2(const ExprProgram& prog, double mu, std::span<const double> xs,
                     std::span<double> out);
#endif

/// Dispatches to the best kernel available at runtime.
void eval_batch(const ExprProgram& prog, double mu, std::span<const double> xs,
                std::span<double> out);

/// Name of the kernel eval_batch dispatches to ("avx2" or "scalar").
const char* active_kernel();

}  // namespace conj1d::kernels
