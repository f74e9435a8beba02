# %% [markdown]
# # Region maps and switch points at gamma = 1.3
#
# Winner per (q, alpha) cell, drawn as text, followed by the computed pairwise
# switch points.

# %%
import numpy as np

from adspricing import proposition_thresholds, region_map, validate_params

fixed = validate_params(q=2.0, gamma=1.3, alpha=0.6)
q_grid = np.linspace(1.0, 5.0, 41)[1:]
alpha_grid = np.linspace(0.05, 0.95, 19)


def show(m):
    letters = {"UP": "u", "US": "s", "BP": "P", "BS": "S"}
    for j in reversed(range(len(alpha_grid))):
        row = "".join(letters[m.winner[i, j].value] for i in range(len(q_grid)))
        print(f"alpha={alpha_grid[j]:.2f} {row}")
    print(" " * 11 + f"q from {q_grid[0]:.1f} to {q_grid[-1]:.1f}")


# %%
show(region_map(fixed, ("q", q_grid), ("alpha", alpha_grid)))

# %% [markdown]
# Restricted to the bundled pair, BS takes the high-q, high-alpha corner.

# %%
show(region_map(fixed, ("q", q_grid), ("alpha", alpha_grid), strategies=("BP", "BS")))

# %%
for key, est in proposition_thresholds(fixed).items():
    value = getattr(est, "value", None)
    print(f"{key:8s} {value:.6f}" if value is not None else f"{key:8s} {est.winner.value} dominates")
