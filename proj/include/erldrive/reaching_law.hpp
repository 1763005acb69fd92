#pragma once

#include <functional>
#include <stdexcept>

namespace erldrive {

// Shape of the exponential reaching law: S' = -(k/N(S)) sign(S) with
// N(S) = delta0 + (1 - delta0) exp(-alpha |S|^p_exp).
struct ErlParams {
    double k = 1.0;       // reaching gain, units of dS/dt
    double delta0 = 0.2;  // asymptotic divisor, in (0,1)
    double alpha = 1.0;   // exponential sharpness, units of |S|^-p_exp
    int p_exp = 1;        // positive integer exponent
};

void validate(const ErlParams& e);

enum class LawKind { constant_rate, exponential };

// A reaching law as the control loops consume it: the kind, the gain and
// shape, and the boundary-layer width of the sat that replaces sign.
struct ReachingLaw {
    LawKind kind = LawKind::exponential;
    ErlParams erl;         // erl.k is the gain for both kinds
    double epsilon = 0.0;  // boundary layer width; 0 degenerates to signum
};

// Boundary-layer saturation: S/eps inside |S| <= eps, sign(S) outside.
// sat(0, 0) = 0 so an exact zero crossing produces no control kick.
double sat(double s, double epsilon);

// N(S) per the shape above; in (delta0, 1], equal to 1 only at S = 0.
double n_of_s(double s, const ErlParams& e);

// Demanded S': -k sat(S, eps) for the constant-rate law,
// -(k/N(S)) sat(S, eps) for the exponential one.
double reaching_rate(double s, const ReachingLaw& law);

// t_r = |S0|/k for S' = -k sign(S).
double reaching_time_constant(double s0, double k);

// t'_r = (1/k) (delta0 |S0| + (1 - delta0) int_0^{|S0|} exp(-alpha s^p) ds).
// Closed form for p_exp = 1, adaptive quadrature otherwise.
double reaching_time_erl(double s0, const ErlParams& e);

// Quadrature path for any p_exp (cross-checked against the closed form).
double reaching_time_erl_quadrature(double s0, const ErlParams& e);

// t'_r - t_r = ((1 - delta0)/k) int_0^{|S0|} (exp(-alpha s^p) - 1) ds,
// computed from the integral so the result is never spuriously positive.
double reaching_time_advantage(double s0, const ErlParams& e);

// Gain k' such that the exponential law with `shape` reaches from s0 in the
// same analytic time as the constant-rate law with gain k_base.
double matched_erl_gain(double s0, double k_base, const ErlParams& shape);

// Recursive adaptive Simpson quadrature with relative tolerance control.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol);

}  // namespace erldrive
