"""Finite-block cost rates: waterline exponents and their square-root terms.

At block length n the per-edge cost is governed by a smoothed spectrum
exponent.  Its per-copy value starts at log2 of the cut rank and decays
toward the entropy; the gap shrinks like b / sqrt(n).
"""

from treecost import Spectrum, figure_data, second_order, spectrum_entropy

spectrum = Spectrum((0.75, 0.25), (1, 1))
eps = 1 / 25

print(f"cut spectrum {spectrum.values}, error budget {eps}")
print(f"  entropy a        {spectrum.entropy:.9f}")
print(f"  log-variance s   {spectrum.std_log:.9f}")
coeffs = second_order(spectrum, eps)
print(f"  sqrt-n term b    {coeffs.b:.9f}")

print()
print("per-copy exponent versus block length")
print(f"{'n':>6} {'H/n':>10} {'a + b/sqrt(n)':>14}")
for n in (10, 40, 160, 640, 2560):
    rate = spectrum_entropy(spectrum, n, eps) / n
    model = coeffs.a + coeffs.b / n**0.5
    print(f"{n:>6} {rate:>10.6f} {model:>14.6f}")

print()
print("second-order data for quarter cuts of growing chain W states")
cols, rows = figure_data("w-second-order")
print(f"  columns {cols}")
for row in rows[::5]:
    print(f"  N={row[0]:<3d} a={row[1]:.6f}  b={row[2]:.4f}")

print()
print("rate comparison: uniform budget vs optimized split vs lower bound")
cols, rows = figure_data("rate-comparison")
print(f"  columns {cols}")
for row in rows[:: len(rows) // 5]:
    n, uni, opt, low = row
    print(f"  n={n:<7d} uniform={uni:.6f} optimized={opt:.6f} "
          f"lower={low:.6f}")
print(f"  all three approach a = {spectrum.entropy:.6f}")
