# Rayleigh branches and their closed-form moments
# ===============================================
#
# Each receive branch sees h_k ~ CN(0, PL). The three quantities that drive
# SC, EGC and MRC are sum |h_k|^2, (sum |h_k|)^2 and max |h_k|^2. We sample
# them and compare against the closed forms.

import numpy as np

from rfeh_diversity import ChannelConfig, mean_channel_statistics, sample_channel, sample_channels

PL = 1e-3

# A single draw is a pure function of (config, seed, trial index):
cfg = ChannelConfig(num_antennas=4, path_loss=PL)
print(sample_channel(cfg, seed=1, trial_index=0))
print(sample_channel(cfg, seed=1, trial_index=0))  # same coefficients again

# Ranges of trials come out as a (trials, K) array.
for k in (1, 2, 4, 8):
    h = sample_channels(ChannelConfig(k, PL), seed=1, start=0, stop=200_000)
    amp = np.abs(h)
    sampled = ((amp**2).sum(1).mean(), (amp.sum(1) ** 2).mean(), (amp**2).max(1).mean())
    exact = mean_channel_statistics(ChannelConfig(k, PL))
    print(f"K={k}")
    for name, s, e in zip(("E[sum|h|^2]", "E[(sum|h|)^2]", "E[max|h|^2]"), sampled, exact):
        print(f"   {name:14s} sampled {s:.4e}   exact {e:.4e}")
