"""Smoke test for the spectra_lab extension module.

Build and place the module next to this script first:

    cargo build --release -p spectra-lab-py --features extension-module
    cp target/release/libspectra_lab.so python/spectra_lab.so
"""

import math
import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import spectra_lab as sl


def main():
    f = sl.RationalMap([1, 0, 1], [1])
    assert f.degree == 2
    assert f.num == [1, 0, 1] and f.den == [1]

    assert [f.fixed_point_form(n)[1] for n in range(1, 5)] == [3, 5, 9, 17]
    assert f.multiplier_polynomial(1) == [0, 4, -2, 1]
    assert f.multiplier_polynomial(2, exact_only=True) == [64, -16, 1]
    assert f.rank_growth(3) == [1, 1, 2]

    classes = f.galois_classes(1)
    assert [c["minpoly"] for c in classes] == [["0", "1"], ["4", "-2", "1"]]
    assert f.length_spectrum(1)["lengths"] == [0.0, 2.0, 2.0]

    g = f.conjugate(1, 1, 0, 1)
    assert g.multiplier_polynomial(2) == f.multiplier_polynomial(2)

    hits = f.sieve(prime_min=2, prime_max=100)["hits"]
    assert any(h["p"] == 5 and h["cycle_len"] == 3 for h in hits)

    cert = f.certify(2, 100, 4)
    assert cert["certificate"]["verified"] and cert["rank"] == 2
    assert [row["prime"] for row in cert["certificate"]["rows"]] == ["2", "5"]

    z2 = sl.RationalMap(["0", "0", "1"], ["1"])
    lyap = z2.lyapunov(20000, seed=1)
    assert abs(lyap["value"] - math.log(2)) < 0.01

    assert sl.RationalMap([-1, 0, 1], [1]).classify_pcf()["verdict"] == "PCF"

    rhos = sorted(f.multipliers_numeric(2), key=lambda z: z.real)
    assert abs(rhos[0] * rhos[1] - 64) < 1e-9

    quad = sl.RationalMap([Fraction(-1, 10), 0, 1], [1])
    assert quad.equidist_gap(6, "coord1", 5000, 1) < 0.05

    assert sl.rog_rank([{2: "1"}, {2: "3"}, {2: "3", 5: "1/2"}]) == 2

    try:
        sl.RationalMap([0, 1], [1])
    except ValueError:
        pass
    else:
        raise AssertionError("degree-1 map accepted")

    print("spectra_lab smoke test ok")


if __name__ == "__main__":
    main()
