"""Write a rep-metrics CSV whose per-rep values reproduce the reference
mean (SD) cells of the effort and peak tables.

Each cell gets 20 values ``mean + sd * z`` where ``z`` is a fixed standard
normal draw re-standardised to sample mean 0 and sample SD 1, so the summary
statistics come back exactly. Used only as a formatting fixture.

    python scripts/make_table_fixture.py tests/fixtures/table_fixture.csv
"""
import sys

import numpy as np

from exokit.emg import RepMetric, RepMetrics, metrics_to_csv

MODES = ("Bare", "Knee", "Hip", "Hip-Knee")
EFFORT = {
    "VM": [(33.2, 6.6), (10.5, 0.9), (27.7, 2.9), (13.4, 2.2)],
    "RF": [(26.2, 3.8), (6.5, 0.9), (21.2, 2.6), (9.0, 1.8)],
    "VL": [(18.0, 3.9), (6.7, 0.6), (14.7, 1.9), (7.9, 0.8)],
    "BF": [(31.5, 6.4), (41.8, 7.0), (42.1, 7.2), (42.9, 11.3)],
    "ST": [(19.9, 3.4), (7.4, 0.9), (14.3, 2.1), (8.8, 1.5)],
    "GM": [(12.6, 1.8), (8.5, 1.3), (11.4, 1.0), (8.2, 1.2)],
}
PEAK = {
    "VM": [(44.1, 10.8), (9.3, 1.5), (29.4, 6.6), (10.4, 1.9)],
    "RF": [(33.8, 8.3), (6.1, 1.3), (24.4, 6.4), (7.4, 2.1)],
    "VL": [(29.3, 8.2), (6.0, 1.1), (19.8, 6.9), (6.8, 1.2)],
    "BF": [(50.4, 14.1), (58.1, 11.6), (53.6, 13.0), (66.5, 23.9)],
    "ST": [(29.6, 9.7), (7.7, 1.9), (16.0, 5.1), (10.5, 3.4)],
    "GM": [(17.0, 5.6), (9.1, 3.2), (11.7, 2.8), (8.5, 2.9)],
}
REPS = 20
REP_SAMPLES = 4000  # 2 s at 2 kHz, nominal bounds only


def standard(rng, n):
    z = rng.normal(size=n)
    return (z - z.mean()) / z.std(ddof=1)


def build(seed=2021):
    rng = np.random.default_rng(seed)
    out = {}
    for j, mode in enumerate(MODES):
        rows = []
        for mus in EFFORT:
            (em, es), (pm, ps) = EFFORT[mus][j], PEAK[mus][j]
            eff = em + es * standard(rng, REPS)
            pk = pm + ps * standard(rng, REPS)
            for k in range(REPS):
                rows.append(RepMetric(mus, k, k * REP_SAMPLES, (k + 1) * REP_SAMPLES,
                                      float(eff[k]), float(pk[k])))
        out[mode] = RepMetrics(rows)
    return out


if __name__ == "__main__":
    path = sys.argv[1] if len(sys.argv) > 1 else "table_fixture.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(metrics_to_csv(build()))
    print(f"wrote {path}")
