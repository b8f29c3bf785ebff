"""Run every applicable axiom check on a theory."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from functools import partial

from . import amplitude as amp
from . import positive as pos
from . import structure as st
from .report import TOL_CONE, TOL_EQ, CheckResult, sort_results
from .theory import Theory, TheoryError

__all__ = ["SUITES", "plan", "run_suite", "summarize"]

SUITES = ("T", "P", "O", "E")


def plan(theory: Theory, suites=SUITES, tol: float = TOL_EQ, tol_cone: float = TOL_CONE,
         graded: bool = True, signature: bool = True, samples: int | None = None):
    """List of ``(suite, callable)`` pairs, one per check instance."""
    s = theory.system
    jobs = []
    hyps = sorted(s.hypersurfaces)
    decs = [(d.whole, d.parts) for d in s.decompositions if len(d.parts) >= 2]
    amps = sorted(theory.amplitudes)
    slices = sorted(r.id for r in s.regions.values() if r.slice_of and r.id in theory.amplitudes)
    reversed_ = sorted(r.id for r in s.regions.values()
                       if r.reverse_of and r.id in theory.amplitudes
                       and r.reverse_of in theory.amplitudes)
    unions = [g.id for g in s.gluings if g.kind == "disjoint-union"
              and all(x in theory.amplitudes for x in g.inputs + (g.result,))]
    selfg = [g.id for g in s.gluings if g.kind == "self-gluing" and g.inputs[0] in theory.amplitudes]
    n = {} if samples is None else {"samples": samples}

    if "T" in suites:
        for h in hyps:
            jobs.append(("T", partial(st.check_T1, theory, h, tol, **n)))
            jobs.append(("T", partial(st.check_T1b, theory, h, tol, **n)))
        for w, p in decs:
            jobs.append(("T", partial(st.check_T2, theory, w, p, tol, graded, **n)))
            jobs.append(("T", partial(st.check_T2b, theory, w, p, tol, graded, **n)))
        for r in slices:
            jobs.append(("T", partial(amp.check_T3x, theory, r, tol, graded)))
        for r in amps:
            jobs.append(("T", partial(amp.check_T4, theory, r, tol)))
        for r in reversed_:
            jobs.append(("T", partial(amp.check_amplor, theory, r, tol)))
        for g in unions:
            jobs.append(("T", partial(amp.check_T5a, theory, g, tol, graded)))
        for g in selfg:
            jobs.append(("T", partial(_t5b, theory, g, tol, signature, graded)))
    if "O" in suites:
        for o in sorted(theory.observables):
            jobs.append(("O", partial(amp.check_O1, theory, o, tol)))
        for g in unions:
            jobs.append(("O", partial(amp.check_O2a, theory, g, tol, graded)))
        for g in selfg:
            jobs.append(("O", partial(amp.check_O2b, theory, g, None, tol)))
    if "P" in suites:
        for h in hyps:
            jobs.append(("P", partial(pos.check_P1, theory, h, tol, tol_cone, **n)))
            jobs.append(("P", partial(pos.check_P1b, theory, h, tol, **n)))
        for w, p in decs:
            jobs.append(("P", partial(pos.check_P2, theory, w, p, tol, tol_cone, graded, **n)))
        for r in slices:
            jobs.append(("P", partial(pos.check_P3x, theory, r, tol, graded)))
        for r in amps:
            jobs.append(("P", partial(pos.check_P4, theory, r, tol, tol_cone, **n)))
        for g in unions:
            jobs.append(("P", partial(pos.check_P5a, theory, g, tol, tol_cone, graded)))
        for g in selfg:
            jobs.append(("P", partial(pos.check_P5b, theory, g, tol, signature, graded)))
    if "E" in suites:
        for r in amps:
            jobs.append(("E", partial(pos.check_E1, theory, r, tol)))
        for r in reversed_:
            jobs.append(("E", partial(pos.check_expmor, theory, r, tol, **n)))
        for g in unions:
            jobs.append(("E", partial(pos.check_E2a, theory, g, tol, graded)))
        for g in selfg:
            jobs.append(("E", partial(pos.check_E2b, theory, g, tol, signature)))
    return jobs


def _t5b(theory, gluing, tol, signature, graded):
    return amp.check_T5b_and_solve_anomaly(theory, gluing, tol, signature, graded)[0]


def _guarded(suite: str, fn) -> CheckResult:
    try:
        return fn()
    except (TheoryError, KeyError, ValueError) as exc:
        name = getattr(fn, "func", fn).__name__.replace("check_", "").replace("_and_solve_anomaly", "")
        target = next((a for a in getattr(fn, "args", ())[1:2]), "?")
        return CheckResult(name, str(target), float("inf"), False, {"error": str(exc), "suite": suite})


def run_suite(theory: Theory, suites=SUITES, tol: float = TOL_EQ, tol_cone: float = TOL_CONE,
              graded: bool = True, signature: bool = True, samples: int | None = None,
              workers: int = 1) -> list[CheckResult]:
    """Run the selected suites; results are sorted by check id then target."""
    jobs = plan(theory, suites, tol, tol_cone, graded, signature, samples)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda j: _guarded(*j), jobs))
    else:
        results = [_guarded(*j) for j in jobs]
    return sort_results(results)


def summarize(results: list[CheckResult]) -> dict:
    by = {}
    for r in results:
        e = by.setdefault(r.check, {"count": 0, "failed": 0, "max_deviation": 0.0})
        e["count"] += 1
        e["failed"] += not r.passed
        e["max_deviation"] = max(e["max_deviation"], r.max_deviation)
    return by
