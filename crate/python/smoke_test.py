"""Smoke test of the Python bindings.

Build and install the extension first:

    pip install maturin
    pip install --no-build-isolation -e crates/python

then run ``python python/smoke_test.py``.
"""

import math

import iga_stokes_py as iga


def check_spline_space():
    s = iga.SplineSpace(3, 2, 8)
    assert s.dim == 11
    first, values = s.eval_basis(0.37)
    assert 0 <= first < s.dim
    assert abs(sum(values) - 1.0) < 1e-12
    mass = s.mass()
    assert abs(sum(map(sum, mass)) - 1.0) < 1e-12
    stiff = s.stiffness()
    assert all(abs(sum(row)) < 1e-10 for row in stiff)
    print(f"{s!r}: dim {s.dim}, partition of unity ok")


def check_direct_and_iterative_solves():
    problem = iga.StokesProblem("TH", degree=2, level=3)
    assert problem.kernel_dim == 1
    x = problem.direct_solve()
    residual = [a - b for a, b in zip(problem.apply(x), problem.rhs())]
    assert math.sqrt(sum(r * r for r in residual)) < 1e-10
    ev, ep = problem.errors(x)
    out = problem.solve("scms_mg", tol=1e-10)
    assert out["converged"], out["iterations"]
    assert abs(out["err_v"] - ev) < 1e-6 * max(ev, 1.0)
    history = out["residual_history"]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(history, history[1:]))
    print(f"{problem!r}: direct errors {ev:.2e}/{ep:.2e}, MINRES {out['iterations']} iterations")
    print(f"inf-sup constant {problem.inf_sup():.4f}")


def check_experiment_cell():
    row = iga.run_cell("RT", degree=2, level=3, geometry="annulus", precond="scms_mg_geo")
    assert row["converged"], row
    print(f"cell {row['family']} p={row['degree']} l={row['level']}: {row['iterations']} iterations")


def check_errors_are_raised():
    try:
        iga.StokesProblem("XX")
    except ValueError as e:
        print(f"rejected unknown family: {e}")
    else:
        raise AssertionError("unknown family accepted")


if __name__ == "__main__":
    check_spline_space()
    check_direct_and_iterative_solves()
    check_experiment_cell()
    check_errors_are_raised()
    print("smoke test passed")
