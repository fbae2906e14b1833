"""Smoke test for the Python bindings.

    cargo build -p ic-alloc-py --features extension-module
    python3 python/smoke_test.py

Pass a path to the built library to test a different build.
"""

import importlib.util
import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load(path):
    spec = importlib.util.spec_from_file_location("ic_alloc", path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    lib = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "target/debug/libic_alloc.so"
    ic = load(lib)

    params = ic.IcParameters(6, 2, 3)
    assert (params.k, params.case, params.s) == (3, "divisible", 2), params
    assert params.pi_bound() == 4

    full = ic.BasePartition(6, 2, 3).to_partition()
    assert full.pi() == 4
    assert abs(full.delta() - 1.2) < 1e-12
    assert abs(full.arf() - 2.0) < 1e-12
    assert full.verify()["ok"]

    design = ic.Design(6, 2, 3)
    assert design.assign([1, 2]) in (1, 2, 3)
    try:
        design.assign([2, 2])
    except ic.IcAllocError:
        pass
    else:
        raise AssertionError("repeated element accepted")

    tasks = ic.TaskSet.thin(20, 3, 0.3, 4)
    assert ic.TaskSet.parse(tasks.to_text()).edges == tasks.edges
    part = ic.BasePartition(20, 3, 9).refine(tasks)
    assert sum(len(g) for g in part.groups) == len(tasks)
    assert design_matches(ic.Design(20, 3, 9), part)
    again = ic.Partition.from_json(part.to_json())
    assert again.groups == part.groups
    report = part.report(len(tasks) / 1140)
    assert report["pi"] == part.pi()
    assert part.pi() <= ic.lex_partition(tasks, 9).pi() or part.pi() <= ic.random_partition(tasks, 9, 1).pi()

    star, witness = ic.brute_force_pi_star(
        ic.TaskSet(7, 2, [[1, 2], [1, 3], [2, 3], [4, 5], [3, 6], [2, 7]]), 2
    )
    assert star == 4 and len(witness) == 2

    value, vacuous = ic.phi_min(100, 2, 10)
    assert vacuous and abs(value - 1.5234) < 1e-3

    mc = ic.monte_carlo_delta(60, 2, 6, 0.5, 4, 1)
    assert mc["trials"] == 4
    sim = ic.simulate_rounds(60, 2, 6, [(0.3, 1), (0.6, 2)])
    assert sim["blind"] and len(sim["rounds"]) == 2

    try:
        ic.IcParameters(6, 2, 6)
    except ic.IcAllocError as e:
        print("unsupported point rejected:", e)
    else:
        raise AssertionError("(6, 2, 6) accepted")

    print(json.dumps({"pi": full.pi(), "delta": full.delta(), "arf": full.arf(), "thinned_pi": part.pi()}))
    print("ok")


def design_matches(design, part):
    return all(design.assign(t) == b for b, group in enumerate(part.groups, 1) for t in group)


if __name__ == "__main__":
    main()
