#pragma once

namespace parsrec {

// Regularized incomplete beta function I_x(a, b), evaluated by the
// continued-fraction expansion (modified Lentz). Accurate to ~1e-10 over the
// parameter ranges a t-test needs.
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability of the Student t distribution with df degrees
// of freedom: P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

}  // namespace parsrec
