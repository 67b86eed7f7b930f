"""Writes the bundled synthetic panel under tests/data.

Monthly data 1990-01..2019-12. Four base factors; expected returns are
generated by an SDF that also loads on SMB^2 and Mkt-RF*HML, so forward
selection has something to find. Macro series start in 2000-01.
"""

import argparse
import pathlib

import numpy as np

BASE = ["Mkt-RF", "SMB", "HML", "Mom"]


def months(start_year, start_month, count):
    out = []
    y, m = start_year, start_month
    for _ in range(count):
        out.append(f"{y:04d}-{m:02d}")
        m += 1
        if m > 12:
            y, m = y + 1, 1
    return out


def write_csv(path, dates, names, values, fmt="%.10g"):
    with open(path, "w") as fh:
        fh.write(",".join(["date"] + names) + "\n")
        for d, row in zip(dates, values):
            fh.write(",".join([d] + [fmt % v for v in row]) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"))
    ap.add_argument("--seed", type=int, default=4)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(args.seed)
    T, N, L = 360, 40, 20
    dates = months(1990, 1, T)

    sd = np.array([0.045, 0.03, 0.03, 0.04])
    mean = np.array([0.006, 0.002, 0.003, 0.005])
    f = mean + rng.standard_normal((T, 4)) * sd

    smb2 = f[:, 1] ** 2
    mkt_hml = f[:, 0] * f[:, 2]
    drivers = np.column_stack([f, smb2, mkt_hml])
    g = drivers - drivers.mean(axis=0)
    sigma = g.T @ g / T

    # Exposures; the higher-order columns are rescaled to unit-variance units.
    scale = np.sqrt(np.diag(sigma))
    B = rng.standard_normal((N, 6)) * 0.8 + np.array([1.0, 0.2, 0.1, 0.0, 0.0, 0.0])
    B = B / scale * scale[0]
    psi = np.array([2.0, 1.0, 1.5, 1.2, 0.0, 0.0])
    psi[4] = 3.0 / scale[4] * scale[0]
    psi[5] = -2.5 / scale[5] * scale[0]
    mu = B @ sigma @ psi
    # Unpriced latent factors spread spurious covariances over many directions.
    latent = rng.standard_normal((T, L)) * 0.03
    latent -= latent.mean(axis=0)
    noise = latent @ rng.standard_normal((L, N)) * 0.5 + rng.standard_normal((T, N)) * 0.02
    r = mu + g @ B.T + noise
    # Returns are stored in percent.
    write_csv(out / "returns.csv", dates, [f"P{i + 1:02d}" for i in range(N)], r * 100.0)
    write_csv(out / "factors.csv", dates, BASE, f)

    # Zoo: mixtures of the drivers plus idiosyncratic noise; one has a gap.
    Z = 12
    W = rng.standard_normal((6, Z)) * 0.5
    zoo = g @ W * 0.5 + rng.standard_normal((T, Z)) * 0.01
    zoo_names = [f"Z{k + 1:02d}" for k in range(Z)]
    with open(out / "zoo.csv", "w") as fh:
        fh.write(",".join(["date"] + zoo_names) + "\n")
        for t, d in enumerate(dates):
            cells = ["%.10g" % v for v in zoo[t]]
            if t == 100:
                cells[Z - 1] = ""
            fh.write(",".join([d] + cells) + "\n")

    start = 120
    vol = np.abs(f[start:, 0]) * 10.0 + rng.standard_normal(T - start) * 0.05
    spread = np.zeros(T - start)
    for t in range(1, T - start):
        spread[t] = 0.9 * spread[t - 1] + rng.standard_normal() * 0.1
    write_csv(out / "macro.csv", dates[start:], ["VOL", "TERM"], np.column_stack([vol, spread]))

    recession = np.zeros(T, dtype=int)
    recession[128:136] = 1
    recession[215:233] = 1
    write_csv(out / "regimes.csv", dates, ["recession"], recession[:, None], fmt="%d")


if __name__ == "__main__":
    main()
