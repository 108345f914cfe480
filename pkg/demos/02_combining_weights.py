# Combiner weights for one channel
# ================================
#
# SC puts all weight on the strongest branch, EGC co-phases every branch with
# magnitude 1/sqrt(K), MRC matches the conjugate channel. All three spend unit
# weight power, and MRC reaches the Cauchy-Schwarz bound sum |h_k|^2.

import numpy as np

from rfeh_diversity import (
    CombinerKind,
    ChannelConfig,
    combined_signal_power,
    net_power,
    reference_profiles,
    sample_channel,
    weights_for,
)
from rfeh_diversity.combining import selected_branch

h = sample_channel(ChannelConfig(4, 1e-3), seed=3, trial_index=0)
print("amplitudes", np.round(h.amplitudes, 5))
print("bound sum|h|^2 =", np.sum(h.power_gains))

profiles = reference_profiles()
for kind in (CombinerKind.SC, CombinerKind.EGC, CombinerKind.MRC):
    w = weights_for(kind, h)
    report = net_power(1.0, 2.0, h, w, profiles[kind], selected_branch=selected_branch(h))
    print(f"{kind.value:>3}  |w| = {np.round(np.abs(w.weights), 3)}  "
          f"|sum w h|^2 = {combined_signal_power(h, w):.4e}  "
          f"net at 2 W = {1e3 * report.net:+.3f} mW")
