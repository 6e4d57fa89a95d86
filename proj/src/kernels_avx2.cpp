// AVX2 variant of the expression-evaluation kernel. Four x lanes per pass,
// same instruction sequence as the scalar reference so results are bit-equal.
// Compiled with -mavx2 in its own translation unit; only reached through the
// runtime dispatch in kernels.cpp.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "conj1d/error.hpp"
#include "conj1d/kernels.hpp"

namespace conj1d::kernels {

namespace {

constexpr int kMaxStack = 64;

inline __m256d pow_int_lanes(__m256d v, int e) {
    bool neg = e < 0;
    unsigned k = neg ? static_cast<unsigned>(-(long)e) : static_cast<unsigned>(e);
    __m256d result = _mm256_set1_pd(1.0);
    __m256d base = v;
    while (k) {
        if (k & 1u) result = _mm256_mul_pd(result, base);
        base = _mm256_mul_pd(base, base);
        k >>= 1u;
    }
    if (neg) result = _mm256_div_pd(_mm256_set1_pd(1.0), result);
    return result;
}

inline void run_lanes(const ExprProgram& prog, __m256d x, __m256d mu, __m256d* st,
                      double* out4) {
    using Op = ExprProgram::Op;
    int sp = 0;
    for (const auto& ins : prog.code) {
        switch (ins.op) {
            case Op::PushConst: st[sp++] = _mm256_set1_pd(ins.darg); break;
            case Op::PushX: st[sp++] = x; break;
            case Op::PushMu: st[sp++] = mu; break;
            case Op::Add: --sp; st[sp - 1] = _mm256_add_pd(st[sp - 1], st[sp]); break;
            case Op::Sub: --sp; st[sp - 1] = _mm256_sub_pd(st[sp - 1], st[sp]); break;
            case Op::Mul: --sp; st[sp - 1] = _mm256_mul_pd(st[sp - 1], st[sp]); break;
            case Op::Div: --sp; st[sp - 1] = _mm256_div_pd(st[sp - 1], st[sp]); break;
            case Op::Neg:
                // sign-bit flip, bit-identical to scalar negation
                st[sp - 1] = _mm256_xor_pd(st[sp - 1], _mm256_set1_pd(-0.0));
                break;
            case Op::PowInt: st[sp - 1] = pow_int_lanes(st[sp - 1], ins.iarg); break;
        }
    }
    _mm256_storeu_pd(out4, st[0]);
}

}  // namespace

void eval_batch_avx2(const ExprProgram& prog, double mu, std::span<const double> xs,
                     std::span<double> out) {
    if (prog.max_stack > kMaxStack)
        throw error(errc::internal, "expression too deep for kernel stack");

    __m256d st[kMaxStack];
    const __m256d mu4 = _mm256_set1_pd(mu);
    std::size_t i = 0;
    for (; i + 4 <= xs.size(); i += 4)
        run_lanes(prog, _mm256_loadu_pd(xs.data() + i), mu4, st, out.data() + i);

    if (i < xs.size()) {
        // Tail: pad the last lane group, discard the padded lanes.
        alignas(32) double tail_in[4] = {0.0, 0.0, 0.0, 0.0};
        alignas(32) double tail_out[4];
        for (std::size_t j = i; j < xs.size(); ++j) tail_in[j - i] = xs[j];
        run_lanes(prog, _mm256_load_pd(tail_in), mu4, st, tail_out);
        for (std::size_t j = i; j < xs.size(); ++j) out[j] = tail_out[j - i];
    }
}

}  // namespace conj1d::kernels

#endif
