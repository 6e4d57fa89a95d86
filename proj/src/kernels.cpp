#include "conj1d/kernels.hpp"

#include <cmath>

#include "conj1d/error.hpp"

namespace conj1d::kernels {

namespace {

constexpr int kMaxStack = 64;

inline double pow_int_scalar(double v, int e) {
    bool neg = e < 0;
    unsigned k = neg ? static_cast<unsigned>(-(long)e) : static_cast<unsigned>(e);
    double result = 1.0, base = v;
    while (k) {
        if (k & 1u) result *= base;
        base *= base;
        k >>= 1u;
    }
    return neg ? 1.0 / result : result;
}

}  // namespace

void eval_batch_scalar(const ExprProgram& prog, double mu, std::span<const double> xs,
                       std::span<double> out) {
    if (prog.max_stack > kMaxStack)
        throw error(errc::internal, "expression too deep for kernel stack");
    using Op = ExprProgram::Op;
    double st[kMaxStack];
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        int sp = 0;
        for (const auto& ins : prog.code) {
            switch (ins.op) {
                case Op::PushConst: st[sp++] = ins.darg; break;
                case Op::PushX: st[sp++] = x; break;
                case Op::PushMu: st[sp++] = mu; break;
                case Op::Add: --sp; st[sp - 1] += st[sp]; break;
                case Op::Sub: --sp; st[sp - 1] -= st[sp]; break;
                case Op::Mul: --sp; st[sp - 1] *= st[sp]; break;
                case Op::Div: --sp; st[sp - 1] /= st[sp]; break;
                case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
                case Op::PowInt: st[sp - 1] = pow_int_scalar(st[sp - 1], ins.iarg); break;
            }
        }
        out[i] = st[0];
    }
}

#if defined(__x86_64__) || defined(_M_X64)

namespace {

bool detect_avx2() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

}  // namespace

void eval_batch(const ExprProgram& prog, double mu, std::span<const double> xs,
                std::span<double> out) {
    static const bool have_avx2 = detect_avx2();
    if (have_avx2)
        eval_batch_avx2(prog, mu, xs, out);
    else
        eval_batch_scalar(prog, mu, xs, out);
}

const char* active_kernel() {
    static const bool have_avx2 = detect_avx2();
    return have_avx2 ? "avx2" : "scalar";
}

#else

void eval_batch(const ExprProgram& prog, double mu, std::span<const double> xs,
                std::span<double> out) {
    eval_batch_scalar(prog, mu, xs, out);
}

const char* active_kernel() { return "scalar"; }

#endif

}  // namespace conj1d::kernels
