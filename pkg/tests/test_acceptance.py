"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion lines
and timings on the terminal.
"""

import json
import math
import random
import time
from contextlib import contextmanager

import numpy as np

from compose_approx.cli import main as cli_main
from compose_approx.combinatorics import bell_number, incomplete_bell_ones
from compose_approx.expr import eval_expr, eval_jet1, eval_scalar, parse
from compose_approx.faadibruno import composite_derivative_1d, composite_jet
from compose_approx.harness import (
    favard_corpus,
    lemma_corpus,
    lemma_weights,
    rate_case,
    select_exponents,
    verify_lemma,
    verify_rate,
)
from compose_approx.jets import jet_lift
from compose_approx.minimax import remez_from_values, remez_grid, weighted_remez
from compose_approx.weighted import (
    JacobiWeight,
    derivative_fn,
    weight_eval,
    weighted_sup_norm,
)

from oracles import (
    bell_count,
    partition_count_brute,
    set_partition_count,
    set_partition_count_enum,
)
from compose_approx.combinatorics import enumerate_partition_vectors

W0 = JacobiWeight(0.0, 0.0)


@contextmanager
def criterion(capsys, number: int, name: str, budget_s: float | None = None):
    """Time a criterion and print its verdict past pytest's capture."""

    def announce(line: str) -> None:
        with capsys.disabled():
            print(line, flush=True)

    t0 = time.time()
    try:
        yield
    except BaseException:
        announce(f"ACCEPTANCE {number} [{name}]: FAIL ({time.time() - t0:.1f}s)")
        raise
    elapsed = time.time() - t0
    announce(f"ACCEPTANCE {number} [{name}]: PASS ({elapsed:.1f}s)")
    if budget_s is not None:
        assert elapsed < budget_s, f"criterion {number} exceeded {budget_s}s budget"


def test_criterion_1_combinatorics_oracles(capsys):
    with criterion(capsys, 1, "combinatorics-oracles", budget_s=5.0):
        for r in range(1, 13):
            assert len(enumerate_partition_vectors(r)) == partition_count_brute(r)
            for k in range(1, r + 1):
                # literal enumeration up to r=9; independent recursive
                # counter beyond (full enumeration of B_12 partitions would
                # alone blow the runtime budget)
                oracle = (
                    set_partition_count_enum(r, k)
                    if r <= 9
                    else set_partition_count(r, k)
                )
                assert incomplete_bell_ones(r, k) == oracle
            total = sum(incomplete_bell_ones(r, k) for k in range(1, r + 1))
            assert total == bell_number(r)  # exact integer identity
            assert bell_number(r) == bell_count(r)


def test_criterion_2_faa_di_bruno_vs_jets_oracle(capsys):
    with criterion(capsys, 2, "expansion-vs-jets-oracle", budget_s=30.0):
        rng = random.Random(2024)
        outer_pool = {
            1: ["exp(y1/4)", "sin(y1)+y1^2", "1/(5+y1)", "cos(y1)-y1/2", "(4+y1)^1.5"],
            2: ["y1*y2", "exp((y1+y2)/8)", "y1^2-y2^2+1", "sin(y1)*cos(y2)", "y1/(5+y2)"],
            3: ["y1*y2*y3", "exp(y1/8)+y2*y3", "y1^2+y2^2+y3^2", "sin(y1+y2)-y3"],
        }
        inner_pool = ["sin(x)", "cos(x)", "x^2/2", "exp(x/4)", "1/(3+x)", "x-x^3/6", "(2+x)^0.5"]
        checked = 0
        while checked < 51:
            n = rng.choice([1, 2, 3])
            f = parse(rng.choice(outer_pool[n]), n, [f"y{j+1}" for j in range(n)])
            gs = [parse(rng.choice(inner_pool), 1) for _ in range(n)]
            x0 = rng.uniform(-0.8, 0.8)
            r = rng.randint(1, 6)
            formula = composite_jet(f, gs, x0, r)
            inner_jets = [eval_jet1(g_j, jet_lift(x0, r)) for g_j in gs]
            oracle = eval_expr(f, inner_jets).derivatives()
            for a, b in zip(formula, oracle):
                a, b = float(a), float(b)
                if max(abs(a), abs(b)) < 1e-6:
                    assert abs(a - b) <= 1e-12, (a, b)
                else:
                    assert abs(a - b) <= 1e-9 * max(abs(a), abs(b)), (a, b)
            checked += 1


def test_criterion_3_bell_number_identity(capsys):
    with criterion(capsys, 3, "bell-via-derivatives"):
        for r in range(1, 13):
            f_derivs = [1.0] * (r + 1)  # exp at 0 after inner value 0
            g_derivs = [0.0] + [1.0] * r
            value = composite_derivative_1d(f_derivs, g_derivs, r)
            expected = float(bell_number(r))
            assert abs(value - expected) <= 1e-10 * expected


def _equioscillation_ok(report, f, w, rel_tol=1e-8):
    if len(report.extrema) < report.m + 2:
        return False
    xs = np.asarray(report.extrema)
    if not np.all(np.diff(xs) > 0):
        return False
    values = [
        (float(f(float(x))) - float(report.poly(x))) * float(weight_eval(w, x))
        for x in report.extrema
    ]
    signs = [1 if v > 0 else -1 for v in values]
    if not all(a != b for a, b in zip(signs, signs[1:])):
        return False
    return all(abs(abs(v) - report.error) <= rel_tol * report.error for v in values)


def test_criterion_4_minimax_exactness(capsys):
    with criterion(capsys, 4, "minimax-exactness"):
        sq = lambda x: x**2
        rep = weighted_remez(sq, 1, W0)
        assert rep.converged
        assert abs(rep.error - 0.5) <= 1e-8
        assert _equioscillation_ok(rep, sq, W0)

        T3 = lambda x: 4 * x**3 - 3 * x
        rep = weighted_remez(T3, 2, W0)
        assert rep.converged
        assert abs(rep.error - 1.0) <= 1e-8
        assert _equioscillation_ok(rep, T3, W0)

        # E_m(P) for P already a polynomial of degree <= m
        for f, m in [
            (lambda x: 2 * x**3 - x + 0.5, 3),
            (lambda x: x**4 - 0.25 * x, 5),
            (lambda x: 7 * np.ones_like(np.asarray(x, dtype=float)), 2),
        ]:
            rep = weighted_remez(f, m, W0)
            assert rep.converged
            assert rep.error <= 1e-12

        # further converged runs with measurable errors must equioscillate
        extra = [
            (lambda x: np.exp(x), 4, W0),
            (lambda x: (1.0 + x) ** 1.5, 5, W0),
            (sq, 1, JacobiWeight(0.5, 0.5)),
            (lambda x: np.sin(3 * x), 6, JacobiWeight(0.25, 0.25)),
        ]
        for f, m, w in extra:
            rep = weighted_remez(f, m, w)
            assert rep.converged
            scale = max(1.0, abs(float(f(0.0))))
            if rep.error > 1e6 * np.finfo(float).eps * scale:
                assert _equioscillation_ok(rep, f, w), (m, w)


def test_criterion_5_lemma_inequality_suite(capsys):
    with criterion(capsys, 5, "derivative-estimate-suite", budget_s=120.0):
        failures = []
        for name, f in lemma_corpus():
            for w in lemma_weights():
                for r in range(2, 6):
                    for k in range(1, r):
                        chk = verify_lemma(f, r, k, w)
                        if not chk.holds:
                            failures.append((name, r, k, w.gamma, w.delta, chk.ratio))
        assert not failures, failures[:10]


def test_criterion_6_favard_boundedness(capsys):
    with criterion(capsys, 6, "favard-boundedness", budget_s=300.0):
        xs = remez_grid(W0)
        for name, f, max_r in favard_corpus():
            fvals = np.asarray(eval_scalar(f, xs), dtype=float)
            errors = {}
            for m in range(1, 201):
                rep = remez_from_values(xs, fvals, m, W0)
                if rep.converged:
                    errors[m] = rep.error
            assert len(errors) >= 190, name  # essentially every degree converges
            for r in (1, 2, 3):
                if r > max_r:
                    continue
                seminorm = weighted_sup_norm(derivative_fn(f, r), W0, r).value
                ms = [m for m in errors if m >= r]
                ratios = [errors[m] * m**r / seminorm for m in ms]
                assert max(ratios) < math.inf
                slope = float(
                    np.polyfit(np.log(ms), np.log(ratios), 1)[0]
                )
                assert slope <= 0.1, (name, r, slope)


def test_criterion_7_composite_rate(capsys):
    with criterion(capsys, 7, "composite-approximation-rate"):
        case = rate_case()
        assert case["ms"] == list(range(8, 129))
        report = verify_rate(
            case["f"], case["g"], case["r"], case["w"], case["ms"], case=case["case"]
        )
        assert report.slope <= -2.85
        assert math.isfinite(report.ratio_sup)
        # measurable degrees only: below the noise floor the ratio measures
        # rounding, not the bound
        usable = report.usable()
        assert len(usable) >= 10
        usable_ms = [report.ms[i] for i in usable]
        cutoff = usable_ms[len(usable_ms) // 2]
        top = [report.ratios[i] for i in usable if report.ms[i] >= cutoff]
        running = np.maximum.accumulate(top)
        assert running[-1] <= running[0] * 1.05


def test_criterion_8_exponent_rule_property(capsys):
    with criterion(capsys, 8, "exponent-rule-property"):
        rng = random.Random(88)
        for _ in range(1000):
            n = rng.randint(1, 6)
            r = rng.randint(1, 6)
            norms = []
            for _ in range(n):
                pick = rng.random()
                if pick < 0.2:
                    norms.append(1.0)  # boundary
                elif pick < 0.6:
                    norms.append(rng.uniform(0.0, 1.0))
                else:
                    norms.append(rng.uniform(1.0, 50.0))
            sel = select_exponents(norms, r)
            for norm, s in zip(norms, sel.exponents):
                assert s in (0, r)
                if norm <= 1.0:
                    assert s == 0
                else:
                    assert s == r
            assert sel.norm_product >= 1.0


def test_criterion_9_determinism(tmp_path, capsys):
    with criterion(capsys, 9, "report-determinism"):
        args = [
            "--seed", "42", "--grid", "1025", "verify", "rate",
            "--f", "exp(y1)", "--g", "(1+x)^3.5", "--r", "3",
            "--ms", "8..24:4", "--case", "det",
        ]
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert cli_main(["--out", str(out_a)] + args) == 0
        assert cli_main(["--out", str(out_b)] + args) == 0
        capsys.readouterr()
        json_a = (out_a / "det-3-0-0.json").read_bytes()
        json_b = (out_b / "det-3-0-0.json").read_bytes()
        assert json_a == json_b
        csv_a = (out_a / "det-3-0-0.csv").read_bytes()
        csv_b = (out_b / "det-3-0-0.csv").read_bytes()
        assert csv_a == csv_b
        payload = json.loads(json_a)
        assert payload["seed"] == 42
