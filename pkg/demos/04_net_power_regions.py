# Net obtained power, no-harvesting boundaries and crossovers
# ============================================================
#
# Subtracting the circuit consumption shifts each curve down by beta + P_d.
# Below its boundary a technique spends more than it harvests. With K = 2, SC
# wins everywhere on [0, 3] W; with K = 8, MRC takes over above ~1.23 W.

from rfeh_diversity import (
    ChannelConfig,
    CombinerKind,
    CrossoverQuery,
    ExperimentSpec,
    Mode,
    NoSignChangeError,
    find_crossover,
    find_no_harvesting_boundary,
)

SC, EGC, MRC = CombinerKind.SC, CombinerKind.EGC, CombinerKind.MRC

for k in (2, 8):
    spec = ExperimentSpec(ChannelConfig(k, 1e-3), trials=200_000, seed=9)
    for kind in (SC, EGC, MRC):
        b = find_no_harvesting_boundary(kind, spec, Mode.ANALYTIC, bracket=(0.01, 3.0))
        print(f"K={k} {kind.value:>3} harvests above {b.root:.4f} W")
    for a, c in ((SC, MRC), (SC, EGC), (EGC, MRC)):
        try:
            x = find_crossover(CrossoverQuery(a, c, (0.1, 3.0)), spec)
            mc = find_crossover(CrossoverQuery(a, c, (0.1, 3.0), Mode.MONTE_CARLO), spec)
            print(f"K={k} {a.value}/{c.value} tie at {x.root:.4f} W "
                  f"(Monte Carlo bracket [{mc.lower:.4f}, {mc.upper:.4f}] W)")
        except NoSignChangeError:
            print(f"K={k} {a.value}/{c.value}: no crossover on [0.1, 3] W")
