# %% [markdown]
# # Repeated US/BS switches at higher gamma
#
# At gamma = 1.3 subscriptions change hands at most once along q. At larger
# gamma a thin BS band can open and close more than once.

# %%
import numpy as np

from adspricing import oscillation_scan, validate_params

for gamma in (1.3, 2.3, 3.0):
    counts = {}
    for alpha in np.arange(0.6, 0.75 + 1e-12, 0.0005):
        n = len(oscillation_scan(validate_params(2.0, gamma, alpha)))
        counts.setdefault(n, []).append(alpha)
    summary = ", ".join(f"{n} switches: {len(a)} alphas (first {a[0]:.4f})" for n, a in sorted(counts.items()))
    print(f"gamma={gamma}: {summary}")

# %%
for gamma, alpha in ((2.3, 0.697), (3.0, 0.625)):
    points = [e.value for e in oscillation_scan(validate_params(2.0, gamma, alpha))]
    print(f"gamma={gamma}, alpha={alpha}: switches at q = {np.round(points, 5).tolist()}")
