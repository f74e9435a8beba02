# %% [markdown]
# # Equilibria at one parameter point
#
# Closed-form optimum of each strategy at q=2, alpha=0.6, gamma=1.3, then the
# grid oracle as an independent check.

# %%
from adspricing import GridSpec, equilibrium, optimize_prices, rank_strategies, validate_params

params = validate_params(q=2.0, gamma=1.3, alpha=0.6)
for strategy in ("UP", "US", "BP", "BS"):
    eq = equilibrium(strategy, params)
    prices = ", ".join(f"{k}={x:.5f}" for k, x in eq.prices.as_dict().items() if k != "strategy")
    print(f"{strategy}  case {eq.case_id}  profit {eq.profit:.5f}  {prices}  eps-limit={eq.epsilon_limit}")

# %% [markdown]
# US reaches the UP profit only as its subscription price goes to zero, so the
# ranking breaks that tie towards UP.

# %%
for strategy, value in rank_strategies(params):
    print(f"{strategy.value}: {value:.6f}")

# %%
spec = GridSpec(refinement_rounds=6)
for strategy in ("UP", "US", "BP", "BS"):
    r = optimize_prices(strategy, params, spec)
    print(f"{strategy}  oracle {r.best_profit:.8f}  bound {r.resolution_bound:.1e}")

# %% [markdown]
# Demand masses behind the BS optimum, compared with a simulated population.

# %%
from adspricing import mc_demand

eq = equilibrium("BS", params)
mc = mc_demand("BS", params, eq.prices, n=10**6, seed=1)
for label, mass in eq.demand.progressive.items():
    print(f"progressive {label}: exact {mass:.5f}  simulated {mc.profile.progressive[label]:.5f}")
for label, mass in eq.demand.conservative.items():
    print(f"conservative {label}: exact {mass:.5f}  simulated {mc.profile.conservative[label]:.5f}")
