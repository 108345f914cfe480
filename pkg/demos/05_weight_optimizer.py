# Numerical weight optimization under a power budget
# ==================================================
#
# The optimizer never sees the MRC formula; it only climbs the net-power
# objective inside the ball sum |w_k|^2 <= budget. It lands on scaled MRC
# when harvesting pays for the weight generation, and on w = 0 otherwise.

import numpy as np

from rfeh_diversity import ChannelConfig, P2Problem, sample_channel, solve_p2, weights_mrc

h = sample_channel(ChannelConfig(6, 1e-3), seed=11, trial_index=0)
h2 = np.sum(h.power_gains)

for beta in (0.2 * h2, 0.9 * h2, 1.5 * h2):
    for budget in (0.5, 1.0, 4.0):
        p = P2Problem(h, efficiency=1.0, transmit_power=1.0, beta=beta, fixed_power=1e-4, budget=budget)
        sol = solve_p2(p)
        mrc = np.sqrt(budget) * weights_mrc(h).weights
        dist = np.max(np.abs(np.abs(sol.weights.weights) - np.abs(mrc)))
        print(f"beta/|h|^2={beta / h2:.1f} budget={budget:3.1f}: P_w={sol.weights.power:.4f} "
              f"objective={sol.objective:+.6e} exact={p.analytic_optimum():+.6e} "
              f"max||w|-|w_mrc||={dist:.1e} iterations={sol.iterations}")
