"""Command-line front end: ``tfreduce {analyze,reduce,simulate,verify} MODEL``.

Exit codes: 0 success, 2 parse or validation error, 3 hypothesis failure
under ``--strict``, 4 no parameterization, 5 integrator failure, 6 failed
invariants.  Reports go to stdout (or ``--out``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import fixtures
from .crn import (
    analyze_structure,
    build_stoich,
    deficiency,
    fast_graph,
    integer_rank,
    left_kernel_basis,
    split_slow_fast,
    weakly_reversible,
)
from .exact import (
    RFMatrix,
    format_ratfun,
    parse_rational,
    poly_eval,
    q_matmul,
    q_rank,
)
from .manifold import (
    NoPositiveSolution,
    NotWeaklyReversible,
    Parameterization,
    complex_balanced_state,
    dphi,
    find_noninteracting_sets,
    monomial_parameterization,
    rational_parameterization,
    sample_points,
    user_parameterization,
    verify_parameterization,
)
from .model import Model, ModelError, load_model, validate_model
from .reduce import (
    Dh0_on_phi,
    P_on_phi,
    ReducedSystem,
    blanket_hypothesis_report,
    complex_balanced_reduced,
    compute_R_general,
    compute_R_graph_case,
    compute_R_via_L,
    decompose_P_mu,
    eigenvalue_consistency,
    functional_independence_check,
    inherited_first_integrals,
    lemma_BA_check,
    projection_Q,
    projection_Q_on_phi,
    reduced_system,
    stability_analysis,
)
from .sim import (
    DenominatorBlowup,
    PositivityViolation,
    StepSizeUnderflow,
    convergence_study,
    manifold_residual,
    write_csv,
)

SCHEMA = 1


class UsageError(Exception):
    """Invalid flag value; maps to exit code 2."""


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class Reduction:
    phi: Parameterization
    rsys: ReducedSystem
    label: str
    dec: object
    x_star: tuple | None = None
    reasons: dict = field(default_factory=dict)


def read_model(path: str) -> Model:
    """Load a model file; ``fixture:NAME`` selects a bundled example."""
    if path.startswith("fixture:"):
        name = path.split(":", 1)[1]
        if name not in fixtures.GENERATORS:
            raise ModelError(f"unknown fixture {name!r}; available: {', '.join(fixtures.bundled())}")
        return fixtures.load(name)
    try:
        return load_model(path)
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _parse_vector(text: str, what: str) -> list[Fraction]:
    try:
        return [parse_rational(t.strip()) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"{what}: cannot parse {text!r}") from exc


def _species_set(spec: str, m: Model) -> tuple[int, ...]:
    names = m.names
    out = []
    for tok in spec.replace("{", "").replace("}", "").split(","):
        tok = tok.strip()
        if tok not in names:
            raise UsageError(f"unknown species {tok!r} in --param")
        out.append(names.index(tok))
    return tuple(sorted(out))


def _try_complex_balanced(m: Model, split, xstar, require_zero_deficiency: bool):
    g = fast_graph(m, split)
    if not weakly_reversible(g):
        raise NotWeaklyReversible("fast subnetwork is not weakly reversible")
    if require_zero_deficiency and deficiency(g, split.N_f) != 0:
        raise NoPositiveSolution("fast subnetwork has positive deficiency")
    cb = complex_balanced_state(split, hint=xstar)
    Lf = left_kernel_basis(split.N_f)
    phi = monomial_parameterization(cb.x, Lf, split)
    rsys = complex_balanced_reduced(phi, Lf, split)
    return phi, rsys, cb.x


def _try_noninteracting(m: Model, split, wanted):
    sets = find_noninteracting_sets(split, m)
    if not sets:
        raise LookupError("no non-interacting species set")
    if wanted is not None:
        match = [s for s in sets if s.indices == wanted]
        if not match:
            raise LookupError("requested species set does not satisfy the elimination conditions")
        chosen = match[0]
    else:
        chosen = sets[0]
    phi = rational_parameterization(chosen, split)
    dec = decompose_P_mu(split)
    R, qss = compute_R_graph_case(phi, dec)
    return phi, reduced_system(phi, R, dec, "qss" if qss else "graph_case"), chosen


def _try_user(m: Model):
    if m.phi is None:
        raise LookupError("model has no @phi section")
    phi = user_parameterization(m.phi)
    dec = decompose_P_mu(m)
    if m.L is not None:
        R = compute_R_via_L(phi, m.L)
        path = "via_L"
    else:
        R = compute_R_general(phi, dec)
        path = "general"
    return phi, reduced_system(phi, R, m if m.generic is not None else dec, path)


def reduce_model(m: Model, param: str = "auto", xstar=None) -> Reduction:
    """Pick a parameterization and compute the reduced system."""
    reasons: dict[str, str] = {}
    crn = m.generic is None
    split = split_slow_fast(build_stoich(m), m) if crn else None
    dec = decompose_P_mu(split if crn else m)
    if param == "auto":
        order = ["complexbalanced", "noninteracting", "user"] if crn else ["user"]
    else:
        order = [param]
    for choice in order:
        try:
            if choice == "complexbalanced":
                if not crn:
                    raise LookupError("complex balancing needs a reaction network")
                phi, rsys, x = _try_complex_balanced(m, split, xstar, param == "auto")
                return Reduction(phi, rsys, "complexbalanced", dec, x, reasons)
            if choice.startswith("noninteracting"):
                if not crn:
                    raise LookupError("non-interacting sets need a reaction network")
                wanted = _species_set(choice.split(":", 1)[1], m) if ":" in choice else None
                phi, rsys, chosen = _try_noninteracting(m, split, wanted)
                label = "noninteracting:" + ",".join(m.names[i] for i in chosen.indices)
                return Reduction(phi, rsys, label, dec, None, reasons)
            if choice == "user":
                phi, rsys = _try_user(m)
                return Reduction(phi, rsys, "user", dec, None, reasons)
            raise UsageError(f"unknown --param value {choice!r}")
        except UsageError:
            raise
        except Exception as exc:  # every failure becomes a per-path reason
            reasons[choice] = f"{type(exc).__name__}: {exc}"
    raise NoParameterization(reasons)


class NoParameterization(Exception):
    def __init__(self, reasons: dict):
        self.reasons = reasons
        super().__init__("; ".join(f"{k}: {v}" for k, v in reasons.items()))


# ---------------------------------------------------------------------------
# report assembly


def _num(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return float(x)


def structural_section(m: Model) -> dict:
    if m.generic is not None:
        g = m.generic
        return {"kind": "generic", "n": g.n, "r": g.r, "s": g.n - g.r}
    st = analyze_structure(m)
    split = split_slow_fast(build_stoich(m), m)
    sets = find_noninteracting_sets(split, m)
    return {
        "kind": "crn",
        "n": st.n,
        "m": st.m,
        "r": st.r,
        "s": st.s,
        "deficiency_fast": st.deficiency_fast,
        "weakly_reversible_fast": st.weakly_reversible_fast,
        "conservation_laws": st.conservation_laws,
        "L_f": st.L_f,
        "rank_N": st.rank_N,
        "noninteracting_sets": [[m.names[i] for i in s.indices] for s in sets],
    }


def hypothesis_section(red: Reduction, samples: int, seed: int) -> dict:
    bl = blanket_hypothesis_report(red.dec, red.phi, samples, seed)
    fi = functional_independence_check(red.dec, red.phi, samples, seed)
    return {
        "rank_Dh0_equals_r": all(bl.rank_ok),
        "A_nonsingular": all(bl.A_nonsingular),
        "tikhonov": all(bl.tikhonov),
        "fenichel": all(bl.fenichel),
        "ill_conditioned_samples": sum(bl.ill_conditioned),
        "functionally_independent": bool(fi),
        "deficiency_zero_certificate": bl.shortcut,
        "passed": bl.passed and bool(fi),
        "samples": samples,
    }


def parameterization_section(red: Reduction, m: Model) -> dict:
    out = {"kind": red.phi.kind, "label": red.label, "phi": red.phi.strings(), "exact": red.phi.exact}
    if red.x_star is not None:
        out["x_star"] = [_num(a) for a in red.x_star]
    return out


def reduction_section(red: Reduction, latex: bool) -> dict:
    rs = red.rsys
    out = {
        "path": rs.path,
        "R": rs.R.to_strings(),
        "rhs": rs.rhs_strings(),
        "first_integrals": [format_ratfun(f) for f in rs.first_integrals],
        "trivial": rs.trivial,
    }
    if latex:
        out["rhs_latex"] = rs.rhs_strings(latex=True)
    return out


def stability_section(red: Reduction, samples: int, seed: int) -> dict:
    st = stability_analysis(red.dec, red.phi, samples, seed=seed)
    return {
        "A": st.A_matrix.to_strings(),
        "method": st.method,
        "verdicts": {v: st.verdicts.count(v) for v in sorted(set(st.verdicts))},
        "shortcut": st.shortcut,
        "global_certificate": st.global_certificate,
        "inconsistencies": st.inconsistencies,
    }


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: str | None, also_stdout: bool = True) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    if also_stdout:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> int:
    m = _load_valid(args.model)
    report = {"schema": SCHEMA, "model": args.model, "structural": structural_section(m)}
    ok = True
    try:
        red = reduce_model(m, args.param, _xstar(args))
        report["hypothesis"] = hypothesis_section(red, args.samples, args.seed)
        ok = report["hypothesis"]["passed"]
    except NoParameterization as exc:
        report["hypothesis"] = {"passed": False, "reasons": exc.reasons}
        ok = False
    _emit(_dump(report), args.out)
    if args.strict and not ok:
        print("hypothesis check failed", file=sys.stderr)
        return 3
    return 0


def cmd_reduce(args) -> int:
    m = _load_valid(args.model)
    try:
        red = reduce_model(m, args.param, _xstar(args))
    except NoParameterization as exc:
        print("no parameterization path succeeded:", file=sys.stderr)
        for k, v in exc.reasons.items():
            print(f"  {k}: {v}", file=sys.stderr)
        return 4
    report = {
        "schema": SCHEMA,
        "model": args.model,
        "structural": structural_section(m),
        "hypothesis": hypothesis_section(red, args.samples, args.seed),
        "parameterization": parameterization_section(red, m),
        "reduction": reduction_section(red, args.latex),
        "stability": stability_section(red, args.samples, args.seed),
    }
    lines = [f"path: {red.rsys.path} ({red.label})"]
    for i, s in enumerate(red.phi.strings()):
        lines.append(f"x{i + 1} = {s}")
    for i, s in enumerate(red.rsys.rhs_strings()):
        lines.append(f"v{i + 1}' = {s}")
    if args.latex:
        for i, s in enumerate(red.rsys.rhs_strings(latex=True)):
            lines.append(f"v_{{{i + 1}}}' = {s}")
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out:
        Path(args.out).write_text(_dump(report), encoding="utf-8")
    if args.strict and not report["hypothesis"]["passed"]:
        print("hypothesis check failed", file=sys.stderr)
        return 3
    return 0


def cmd_simulate(args) -> int:
    m = _load_valid(args.model)
    ladder = [float(e) for e in _parse_vector(args.eps_ladder, "--eps-ladder")]
    if not ladder or any(e <= 0 for e in ladder):
        raise UsageError("--eps-ladder: epsilon must be positive for the full system")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise UsageError("--eps-ladder: values must be strictly decreasing")
    try:
        red = reduce_model(m, args.param, _xstar(args))
    except NoParameterization as exc:
        for k, v in exc.reasons.items():
            print(f"{k}: {v}", file=sys.stderr)
        return 4
    s = red.phi.s
    # all-ones often sits on an equilibrium of the slow flow, so start off it
    v0 = [float(a) for a in _parse_vector(args.v0, "--v0")] if args.v0 else [2.0] + [1.0] * (s - 1)
    if len(v0) != s:
        raise UsageError(f"--v0: expected {s} entries, got {len(v0)}")
    if any(a <= 0 for a in v0):
        raise UsageError("--v0: entries must be positive")
    window = None
    tau = [float(a) for a in _parse_vector(args.tau, "--tau")]
    if len(tau) == 1:
        tau_max = tau[0]
    elif len(tau) == 2:
        window = (tau[0], tau[1])
        tau_max = tau[1]
    else:
        raise UsageError("--tau: give TAU_MAX or TAU_MIN,TAU_MAX")
    try:
        cr = convergence_study(m, red.rsys, v0, ladder, window, tau_max=tau_max)
    except (StepSizeUnderflow, DenominatorBlowup, PositivityViolation) as exc:
        print(f"integrator failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 5
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    h0 = m.h0()
    files = []
    if args.csv_out:
        os.makedirs(args.csv_out, exist_ok=True)
        red_tr = cr.reduced
        path = os.path.join(args.csv_out, "reduced.csv")
        write_csv(path, red_tr.times, red_tr.states, red_tr.x, manifold_residual(h0, red_tr.x))
        files.append(path)
        for e, tr in zip(cr.eps_ladder, cr.full):
            path = os.path.join(args.csv_out, f"eps_{e:g}.csv")
            write_csv(path, tr.times, red_tr.states, tr.states, manifold_residual(h0, tr.states))
            files.append(path)
    summary = {
        "schema": SCHEMA,
        "model": args.model,
        "path": red.rsys.path,
        "eps_ladder": cr.eps_ladder,
        "errors": cr.errors,
        "ratios": [None if math.isnan(q) else q for q in cr.ratios],
        "monotone": cr.monotone,
        "ratios_in_band": cr.within(),
        "tau_window": list(cr.tau_window),
        "v0": v0,
        "csv": files,
    }
    _emit(_dump(summary), args.out)
    return 0


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


def _run(checks: list, name: str, fn) -> None:
    try:
        res = fn()
        ok, detail = (res if isinstance(res, tuple) else (bool(res), ""))
    except Exception as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    checks.append(Check(name, ok, detail))


def invariant_suite(m: Model, samples: int = 20, seed: int = 42) -> list[Check]:
    """Every applicable identity for every available parameterization."""
    checks: list[Check] = []
    crn = m.generic is None
    split = split_slow_fast(build_stoich(m), m) if crn else None
    dec = decompose_P_mu(split if crn else m)
    _run(checks, "h0 = P mu", dec.check)
    candidates: list[tuple[str, str]] = []
    if m.phi is not None:
        candidates.append(("user", "user"))
    if crn:
        if find_noninteracting_sets(split, m):
            candidates.append(("noninteracting", "noninteracting"))
        if weakly_reversible(fast_graph(m, split)):
            candidates.append(("complexbalanced", "complexbalanced"))
    if not candidates:
        checks.append(Check("parameterization available", False, "no parameterization path applies"))
        return checks
    for label, param in candidates:
        try:
            red = reduce_model(m, param)
        except NoParameterization as exc:
            checks.append(Check(f"[{label}] reduction", False, str(exc)))
            if label == "user" and m.phi is not None:
                phi = user_parameterization(m.phi)
                rep = verify_parameterization(phi, m, samples, seed)
                checks.append(Check(f"[{label}] h0∘Φ ≡ 0", rep.manifold_exact is not False and rep.manifold_residual < 1e-10, "; ".join(rep.failures)))
            continue
        _parameterization_checks(checks, label, m, red, split, samples, seed)
    return checks


def _parameterization_checks(checks, label, m, red: Reduction, split, samples, seed):
    phi, rs, dec = red.phi, red.rsys, red.dec
    F = phi.field
    exact = phi.exact
    rep = verify_parameterization(phi, m, samples, seed)
    checks.append(Check(f"[{label}] h0∘Φ ≡ 0", rep.manifold_exact is not False and rep.manifold_residual < 1e-10, "; ".join(f for f in rep.failures if "h0" in f)))
    checks.append(Check(f"[{label}] rank DΦ = s", rep.generic_rank in (None, phi.s) and all(r == phi.s for r in rep.point_ranks)))
    checks.append(Check(f"[{label}] Φ positive", rep.positive))
    D = dphi(phi)
    R = rs.R
    P = P_on_phi(dec, phi)
    I_s = RFMatrix.identity(phi.s, F)
    _run(checks, f"[{label}] R·DΦ = I_s", lambda: R @ D == I_s)
    _run(checks, f"[{label}] R·P = 0", lambda: (R @ P).is_zero())
    DR = D @ R
    _run(checks, f"[{label}] (DΦ·R)² = DΦ·R", lambda: DR @ DR == DR)

    def paths():
        others = {"general": compute_R_general(phi, dec)}
        L = m.L if (m.L is not None and label == "user") else (left_kernel_basis(split.N_f) if split else None)
        if L is not None:
            others["via_L"] = compute_R_via_L(phi, L)
        others["graph_case"] = compute_R_graph_case(phi, dec)[0]
        bad = [k for k, v in others.items() if v != R]
        return not bad, ("differs: " + ", ".join(bad)) if bad else ""

    _run(checks, f"[{label}] path equivalence", paths)
    _run(checks, f"[{label}] Q∘Φ = DΦ·R", lambda: projection_Q_on_phi(dec, phi) == DR)

    def q_points():
        pts = sample_points(phi.s, min(samples, 5), seed)
        Pq = dec.P_rational() if dec.constant_P else None
        for v in pts:
            x = phi.evaluate(v) if exact else [Fraction(float(a)) for a in phi.evaluate_float([float(a) for a in v])]
            Q = projection_Q(dec, x)
            if q_matmul(Q, Q) != Q:
                return False, f"Q² ≠ Q at v = {list(map(str, v))}"
            Pv = Pq if Pq is not None else [[poly_eval(e, x) for e in row] for row in dec.P]
            if any(e != 0 for row in q_matmul(Q, Pv) for e in row):
                return False, "Q·P ≠ 0"
            if q_rank(Q) != phi.s:
                return False, "rank Q ≠ s"
        return True, ""

    _run(checks, f"[{label}] Q² = Q, Q·P = 0, rank Q = s", q_points)

    def invariance():
        if exact and phi.phi is not None:
            return (Dh0_on_phi(dec, phi) @ D).is_zero()
        worst = 0.0
        J = Dh0_on_phi(dec, phi) @ D
        for v in sample_points(phi.s, samples, seed):
            worst = max(worst, float(np.max(np.abs(J.evaluate_float([float(a) for a in v])))))
        return worst < 1e-8, f"max |Dh0·DΦ| = {worst:.3e}"

    _run(checks, f"[{label}] Dh0(Φ)·DΦ ≡ 0", invariance)

    def integrals():
        if split is None:
            return True
        N = [a + b for a, b in zip(split.N_f, split.N_s)]
        inherited_first_integrals(left_kernel_basis(N), phi, rs.rhs)
        return True

    _run(checks, f"[{label}] first integrals inherited", integrals)

    def triviality():
        if split is None:
            return True
        N = [a + b for a, b in zip(split.N_f, split.N_s)]
        if integer_rank(N) == split.r:
            return all(not f for f in rs.rhs), "rank N = rank N_f but rhs ≠ 0"
        return True

    _run(checks, f"[{label}] triviality", triviality)

    def lemma():
        for v in sample_points(phi.s, min(samples, 5), seed):
            if not lemma_BA_check(D.evaluate(v), R.evaluate(v)):
                return False, f"BA ≠ I at v = {list(map(str, v))}"
        return True

    _run(checks, f"[{label}] lemma BA = I_s", lemma)

    def blanket():
        bl = blanket_hypothesis_report(dec, phi, samples, seed)
        return bl.passed, "" if bl.passed else "blanket hypothesis fails at some sample"

    _run(checks, f"[{label}] blanket hypothesis", blanket)

    def eig():
        ec = eigenvalue_consistency(dec, phi, samples, seed)
        return ec.passed, f"max deviation {max(ec.max_deviation):.3e}"

    _run(checks, f"[{label}] eigenvalue consistency", eig)
    if rs.path == "complex_balanced":
        Lf = left_kernel_basis(split.N_f)
        _run(checks, f"[{label}] closed form = via L", lambda: reduced_system(phi, compute_R_via_L(phi, Lf), split, "via_L").rhs == rs.rhs)


def cmd_verify(args) -> int:
    m = _load_valid(args.model)
    checks = invariant_suite(m, args.samples, args.seed)
    width = max(len(c.name) for c in checks)
    lines = []
    for c in checks:
        status = "PASS" if c.ok else "FAIL"
        extra = f"  {c.detail}" if c.detail and not c.ok else ""
        lines.append(f"{status}  {c.name.ljust(width)}{extra}")
    text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    failed = [c.name for c in checks if not c.ok]
    if failed:
        print("failed invariants: " + ", ".join(failed), file=sys.stderr)
        return 6
    return 0


# ---------------------------------------------------------------------------
# entry point


def _load_valid(path: str) -> Model:
    m = read_model(path)
    errors = [d for d in validate_model(m) if d.level == "error"]
    if errors:
        raise ModelError("; ".join(d.message for d in errors))
    for d in validate_model(m):
        if d.level == "warning":
            print(str(d), file=sys.stderr)
    return m


def _xstar(args):
    if getattr(args, "xstar", None):
        return tuple(_parse_vector(args.xstar, "--xstar"))
    return None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42, help="seed for sample points (default 42)")
    common.add_argument("--samples", type=int, default=20, help="number of sample points (default 20)")
    common.add_argument("--out", help="write the report to this file")
    common.add_argument("--strict", action="store_true", help="exit 3 when the hypothesis checks fail")
    common.add_argument("--param", default="auto", help="auto | noninteracting[:X1,X2] | complexbalanced | user")
    common.add_argument("--xstar", help="comma-separated positive steady state used as hint for x*")

    parser = argparse.ArgumentParser(prog="tfreduce", description="Reduction of slow-fast reaction systems onto the critical manifold.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analyze", parents=[common], help="structure and hypothesis checks (JSON)")
    p.add_argument("model")
    p.set_defaults(func=cmd_analyze)
    p = sub.add_parser("reduce", parents=[common], help="compute and print the reduced system")
    p.add_argument("model")
    p.add_argument("--latex", action="store_true", help="also print LaTeX")
    p.set_defaults(func=cmd_reduce)
    p = sub.add_parser("simulate", parents=[common], help="convergence study against the full system")
    p.add_argument("model")
    p.add_argument("--eps-ladder", default="0.04,0.02,0.01,0.005", help="strictly decreasing positive epsilons (default 0.04,0.02,0.01,0.005)")
    p.add_argument("--v0", help="initial parameter vector, comma-separated (default 2,1,...,1)")
    p.add_argument("--tau", default="0.1,5", help="TAU_MAX or TAU_MIN,TAU_MAX (default 0.1,5)")
    p.add_argument("--csv-out", help="directory for per-epsilon CSV files")
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("model")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
