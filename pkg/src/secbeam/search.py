"""Grid-plus-refinement minimization of the per-gamma convex solves.

All three design pipelines search a scalar CU-SINR parameter over a closed
interval: each evaluation is one cone-program solve, infeasible evaluations
count as +inf, and grid points are independent (so they can fan out across a
process pool).
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import conic

INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def _grid_solver():
    # scan points near the feasibility boundary converge slowly; cap them and
    # let the final tight solve at the winning gamma run with the full budget
    return conic.SolverSettings(max_iters=25000)


@dataclass
class SearchSettings:
    """Controls the 1D search and the solver effort at each phase."""

    points: int = 100
    workers: int = 1
    grid_solver: conic.SolverSettings = field(default_factory=_grid_solver)
    final_solver: conic.SolverSettings = field(default_factory=conic.SolverSettings)
    refine: bool = False
    refine_evals: int = 12


def design_settings(points=100, workers=1):
    """Search settings sized for the design pipelines at full pattern grids.

    The loose, capped grid pass ranks the gamma candidates reliably (the
    matching errors separate far above 1e-4); the winning gamma is re-solved
    tightly with a budget sized for the slow tail of the splitting iteration
    on large programs.  The final tolerance is 1e-5: on dense pattern grids
    the dual residual decays like 1/k once the primal and gap residuals are
    down at 1e-7, and 1e-5 is reachable within the budget while already
    giving iterates whose blocks are PSD to machine precision, so the
    downstream clip/repair/rank-one steps see no usable difference from a
    1e-6 solve.
    """
    return SearchSettings(
        points=points,
        workers=workers,
        grid_solver=conic.SolverSettings(tol=1e-4, max_iters=25000),
        final_solver=conic.SolverSettings(tol=1e-5, max_iters=400000),
    )


def _eval_point(gamma, problem_of, solver):
    sol = conic.solve(problem_of(gamma), solver)
    value = sol.objective if sol.status == "optimal" else np.inf
    return float(gamma), float(value), sol.status, sol.iterations


def grid_minimize(problem_of, lo, hi, settings):
    """Scan a uniform gamma grid, optionally golden-section refine.

    problem_of(gamma) must return a ConicProblem; the solved objective is
    the value minimized (the matching-residual norm for the design
    pipelines, the transmit power for the benchmark).  Returns (best_gamma,
    table) where table rows are (gamma, value, status, iterations);
    best_gamma is None when every point is infeasible.
    """
    gammas = np.linspace(lo, hi, settings.points) if settings.points > 1 else np.array([lo])
    run = partial(_eval_point, problem_of=problem_of, solver=settings.grid_solver)
    if settings.workers > 1:
        chunk = max(1, len(gammas) // settings.workers)
        with ProcessPoolExecutor(max_workers=settings.workers) as pool:
            table = list(pool.map(run, gammas, chunksize=chunk))
    else:
        table = [run(g) for g in gammas]

    values = np.array([row[1] for row in table])
    if not np.any(np.isfinite(values)):
        return None, table
    best = int(np.argmin(values))
    best_gamma, best_value = table[best][0], table[best][1]

    if settings.refine and len(gammas) > 2:
        # golden-section inside the bracketing neighbors; infeasible evals
        # stay +inf and never displace the incumbent
        a = gammas[max(best - 1, 0)]
        b = gammas[min(best + 1, len(gammas) - 1)]
        x1 = b - INVPHI * (b - a)
        x2 = a + INVPHI * (b - a)
        f1 = run(x1)
        f2 = run(x2)
        table.extend([f1, f2])
        for _ in range(max(settings.refine_evals - 2, 0)):
            if f1[1] <= f2[1]:
                b, x2, f2 = x2, x1, f1
                x1 = b - INVPHI * (b - a)
                f1 = run(x1)
                table.append(f1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + INVPHI * (b - a)
                f2 = run(x2)
                table.append(f2)
        for row in (f1, f2):
            if row[1] < best_value:
                best_gamma, best_value = row[0], row[1]
    return best_gamma, table
