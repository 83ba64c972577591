"""Absolute errors at 256^2 next to the target magnitudes.

The target numbers behave like plain (unweighted) vector 2-norms and max
norms of u - u_ref, so that is what is printed here together with the ratio.
"""

import sys

sys.path.insert(0, str(__import__("pathlib").Path(__file__).resolve().parent.parent / "tests"))

from test_acceptance import TARGET_L2, TARGET_LINF, full_magnitudes  # noqa: E402

if __name__ == "__main__":
    ratios = full_magnitudes()
    print("order,tau,l2_ratio,linf_ratio")
    for (k, tau), (a, b) in sorted(ratios.items()):
        print(f"{k},{tau:.17g},{a:.4f},{b:.4f}")
    worst = max(max(a, 1 / a, b, 1 / b) for a, b in ratios.values())
    print(f"# worst factor {worst:.3f}; target tables: {len(TARGET_L2)}/{len(TARGET_LINF)} orders")
