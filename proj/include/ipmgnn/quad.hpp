#pragma once

namespace ipmgnn {

// Largest alpha in (0, cap] such that a t^2 + b t + c >= 0 for every t in
// [0, alpha]. A negative c is treated as 0. Returns 0 when the quadratic turns
// negative immediately. Shared by the direct solver and the message-passing
// interpreter so both evaluate the same floating-point operations.
double quad_root(double a, double b, double c, double cap);

}  // namespace ipmgnn
