"""Smoke test for the mapmemetic extension.

Build and run from the workspace root:

    cargo build --release -p map-memetic-py --features extension-module
    cp target/release/libmapmemetic.so crates/python/python/mapmemetic.so
    python3 crates/python/python/smoke_test.py
"""
import itertools

import mapmemetic as mm


def brute_force(inst):
    n = inst.n
    best = None
    for p2 in itertools.permutations(range(1, n + 1)):
        for p3 in itertools.permutations(range(1, n + 1)):
            w = sum(inst.vector_weight([i + 1, p2[i], p3[i]]) for i in range(n))
            best = w if best is None else min(best, w)
    return best


def main():
    inst = mm.Instance.generate("r", 3, 4, 1)
    assert (inst.s, inst.n, inst.seed, inst.id) == (3, 4, 8, "3r4-1")
    assert mm.Instance.from_text(inst.to_text()).to_text() == inst.to_text()

    start = mm.greedy(inst)
    assert start.vectors()[0][0] == 1
    improved = mm.local_search(inst, start, "sDVv")
    assert improved.weight(inst) <= start.weight(inst)

    run = mm.run_memetic(inst, 2.0, tick=0.01, seed=5)
    again = mm.run_memetic(inst, 2.0, tick=0.01, seed=5)
    assert run["weight"] == again["weight"] and run["assignment"] == again["assignment"]
    assert run["weight"] == brute_force(inst), (run["weight"], brute_force(inst))
    assert run["trajectory"] == sorted(run["trajectory"], reverse=True)

    assert mm.m_opt(10.0, 0.01) == 9
    assert mm.m_opt(1.0, 1.0) == 2
    perm, total = mm.solve_ap([[4.0, 1.0], [2.0, 8.0]])
    assert (perm, total) == ([2, 1], 3.0)
    assert abs(mm.relative_error(110.0, 100.0) - 10.0) < 1e-12
    assert mm.scaled_error(5.0, 0.0, 10.0) == 50.0
    assert "sDVv" in mm.LOCAL_SEARCHES

    for bad in (lambda: mm.Instance.generate("xx", 3, 4, 1),
                lambda: mm.Assignment([[1, 1, 1], [1, 2, 2]]),
                lambda: mm.local_search(inst, start, "nope"),
                lambda: mm.m_opt(0.0, 1.0)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    print("ok")


if __name__ == "__main__":
    main()
