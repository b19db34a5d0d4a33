"""Estimate a rate, then re-ask the question on three other scales.

With the sqrt-Fisher-corrected prior class the answer commutes with any
smooth one-to-one reparameterization: transform the estimate, or
estimate the transformed quantity, same number.  The plain conjugate
class has no such luck, shown at the end.
"""

from gminimax import (
    builtin_family,
    eta_scale_prgm,
    iprgm_jcp_box,
    make_transform,
    prgm_conjugate_box,
    prior_box,
    transport,
)

fam = builtin_family("exponential")
x = 2.0

jcp_box = prior_box(fam, 1.0, 3.0, 1.0, 2.0, "jcp")
report = iprgm_jcp_box(fam, jcp_box, x)
print(f"rate estimate (corrected class): {report.estimate:.10f}\n")

# scale: mean lifetime 1/theta, entropy-style log theta, a stretched log
for spec in ("reciprocal", "neg_log_over_a(1)", "neg_log_over_a(-2)"):
    tr = make_transform(spec, fam)
    pushed = transport(report, tr)
    direct = eta_scale_prgm(fam, jcp_box, x, tr).estimate
    print(f"{tr.label:>22}: transported {pushed:+.10f}"
          f"   recomputed {direct:+.10f}   gap {abs(pushed-direct):.2e}")

# control: same exercise in the uncorrected conjugate class
std_box = prior_box(fam, 1.5, 3.0, 1.0, 2.0, "standard")
std = prgm_conjugate_box(fam, std_box, x)
tr = make_transform("reciprocal", fam)
pushed = float(tr.forward(std.estimate))
direct = eta_scale_prgm(fam, std_box, x, tr).estimate
print(f"\nuncorrected class, reciprocal scale:")
print(f"  transported {pushed:.6f} vs recomputed {direct:.6f}"
      f"   gap {abs(pushed-direct):.4f}   <- not invariant")
