"""Smoke test for the orbitq extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml
    pip install target/wheels/orbitq-*.whl
"""

from fractions import Fraction as F
from math import factorial

import orbitq


def main():
    e8 = orbitq.lookup_case("E8:8")
    assert e8.m == 28 and e8.blocks == [(4, 4, 1)]
    assert all(ok for _, ok in e8.validate())
    (bundle,) = e8.bundles()
    assert (bundle.twist, bundle.r0, bundle.a, bundle.b) == ("L0", F(7), F(3), F(5))
    assert bundle.valid and bundle.alpha == 14

    assert orbitq.lookup_case("SO:4,5").bundles() == []
    sl3 = orbitq.lookup_case("SL:3").bundles()
    assert [b.valid for b in sl3] == [True, False]
    assert sl3[1].a is None

    rows = orbitq.table(pmax=6, nmax=6)
    assert all(isinstance(r["r0"], F) for r in rows)
    assert any(r["case_id"] == "G2:2" and r["a"] == F(4, 3) for r in rows)

    for n in range(9):
        _, norm = orbitq.ladder_norms(F(1), F(4, 3), F(5, 3), n)
        closed = F(factorial(3 * n + 3), 3 ** (3 * n) * 6 * factorial(n) * factorial(n + 1) ** 2)
        assert norm == closed, (n, norm, closed)

    p = orbitq.kernel_coefficients(F(1), F(1), F(1), 5)
    assert p == [F(n + 1, factorial(n) ** 2) for n in range(6)]
    assert orbitq.pochhammer(F(3, 2), 2) == F(15, 4)
    value, bound = orbitq.matrix_coefficient(F(1), F(1), F(1), F(0), 10)
    assert (value, bound) == (1, 0)

    ring = orbitq.Ring(["x", "y"])
    x, y = ring.var("x"), ring.var("y")
    f = x * x * y - y
    assert f.diff(["x"]) == (x * y).scale(2)
    assert f.coeff("x^2*y") == 1

    rep = orbitq.verify_model("g2", 3)
    assert rep["passed"] and rep["rank"] == 14
    assert orbitq.gram_hw_norms("so44", 3) == [F(1, n + 1) for n in range(4)]

    try:
        orbitq.lookup_case("E9:9")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown case accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
