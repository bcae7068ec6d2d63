"""Smoke test for the hvtorus Python extension."""

import hvtorus


def main():
    assert hvtorus.bracket("t[1,0]", "E[0,1]") == "-1*t[1,1]"
    assert hvtorus.bracket("K1", "E[5,5]") == "0"
    assert hvtorus.bracket("d1", "E[3,5]") == "3*E[3,5]"

    assert hvtorus.is_zbasis((2, 1), (1, 1))
    assert not hvtorus.is_zbasis((2, 0), (0, 2))
    assert hvtorus.det((0, 1), (1, 0)) == -1

    fuzz = hvtorus.jacobi_fuzz(window=3, trials=200, seed=1)
    assert fuzz["pass"], fuzz

    fock = hvtorus.dims(
        {"construction": "fock", "epsilon": "+", "a": 1, "truncation": {"depth": 5, "window": 0}}
    )
    assert sorted(r["dim"] for r in fock["rows"]) == [1, 1, 2, 3, 5, 7]

    cls = hvtorus.classify_t_rho({"kind": "table", "E": {"2": "1", "-2": "1"}}, window=24)
    assert cls["r"] == 2 and cls["irreducible"]

    growth = hvtorus.experiment(
        {"experiment": "growth", "c": [0, 1, 0, 0], "epsilon": "+", "sweep": [1, 2, 3]}
    )
    assert growth["verdict"] == "growing", growth["verdict"]

    try:
        hvtorus.experiment({"experiment": "growth", "c": [0, 0, 0, 0], "epsilon": "+", "sweep": [1, 2, 3]})
    except RuntimeError as e:
        assert "case mismatch" in str(e)
    else:
        raise AssertionError("level (0,0,0,0) must be rejected")

    try:
        hvtorus.bracket("E[1", "E[0,1]")
    except ValueError as e:
        assert "position" in str(e)
    else:
        raise AssertionError("parse error expected")

    print("smoke test ok")


if __name__ == "__main__":
    main()
