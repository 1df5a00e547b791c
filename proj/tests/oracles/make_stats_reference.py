"""Freeze scipy reference values for the statistics tests.

Series are drawn from a splitmix64 stream that tests/support/support.hpp
reproduces bit for bit, so only seeds and results are stored. Rerun with
`python3 tests/oracles/make_stats_reference.py tests/fixtures/stats`.
"""

import sys
from pathlib import Path

from scipy import stats

MASK = (1 << 64) - 1


class SplitMix:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self):
        return (self.next() >> 11) * 2.0**-53


def sequential_sum(values):
    # Plain left fold; sum() is compensated on newer Pythons.
    total = 0.0
    for v in values:
        total += v
    return total


def paired_series(seed):
    g = SplitMix(seed)
    n = 5 + g.next() % 196
    rho = 2.0 * g.uniform() - 1.0
    w = 1.0 - abs(rho)
    xs, ys = [], []
    for _ in range(n):
        x = g.uniform()
        u = g.uniform()
        xs.append(x)
        ys.append(rho * x + w * u)
    return xs, ys


def two_groups(seed):
    g = SplitMix(seed)
    na = 2 + g.next() % 39
    nb = 2 + g.next() % 39
    scale_a = 0.1 + 4.0 * g.uniform()
    scale_b = 0.1 + 4.0 * g.uniform()
    shift = 2.0 * g.uniform() - 1.0
    a = [scale_a * g.uniform() for _ in range(na)]
    b = [scale_b * g.uniform() + shift for _ in range(nb)]
    return a, b


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "pearson_reference.csv", "w") as f:
        f.write("seed,n,sum_x,sum_y,r,p\n")
        for i in range(200):
            seed = 1000 + i
            xs, ys = paired_series(seed)
            res = stats.pearsonr(xs, ys)
            f.write(f"{seed},{len(xs)},{sequential_sum(xs)!r},{sequential_sum(ys)!r},{float(res.statistic)!r},{float(res.pvalue)!r}\n")
    with open(out / "welch_reference.csv", "w") as f:
        f.write("seed,n_a,n_b,t,df,p\n")
        for i in range(100):
            seed = 5000 + i
            a, b = two_groups(seed)
            res = stats.ttest_ind(a, b, equal_var=False)
            va, vb = stats.tvar(a), stats.tvar(b)
            qa, qb = va / len(a), vb / len(b)
            df = (qa + qb) ** 2 / (qa**2 / (len(a) - 1) + qb**2 / (len(b) - 1))
            f.write(f"{seed},{len(a)},{len(b)},{float(res.statistic)!r},{float(df)!r},{float(res.pvalue)!r}\n")
    with open(out / "t_cdf_reference.csv", "w") as f:
        f.write("t,df,cdf\n")
        for df in (1.0, 2.0, 3.0, 5.0, 10.0, 30.0, 100.0, 1000.0, 1e6, 0.5, 2.5):
            for t in (-40.0, -6.0, -2.0, -1.0, -0.25, 0.0, 0.1, 0.5, 1.0, 2.0, 3.5, 10.0, 40.0):
                f.write(f"{t!r},{float(df)!r},{float(stats.t.cdf(t, df))!r}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/stats")
