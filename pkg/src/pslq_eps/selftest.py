"""Fast invariant suites behind the ``selftest`` CLI command.

Runs at modest precision in well under a minute; the full property suite
with many more samples lives in the test tree.
"""

import random

from .error_control import h_perturbation_bound
from .hyperplane import build_h, fro_norms, normalize_and_permute, principal_inverse
from .ingest import brute_force_relation, perturb, verify_relation
from .numerics import with_precision
from .pslq_core import PslqState, iterate, pi_function, run_pslq_epsilon

DIGITS = 40


def _random_alpha(rng, n, ctx):
    v = [rng.uniform(-1, 1) or 0.3 for _ in range(n)]
    return normalize_and_permute(v, ctx)


def _frob(rows):
    acc = None
    for row in rows:
        for x in row:
            acc = x * x if acc is None else acc + x * x
    return acc.context.sqrt(acc)


def _check_hyperplane(ctx, rng, report):
    tol = ctx.real(10) ** (-(ctx.digits - 5))
    ok = True
    for n in range(2, 9):
        alpha = _random_alpha(rng, n, ctx)
        H = build_h(alpha)
        a = alpha.entries
        # left kernel
        for j in range(n - 1):
            ok &= abs(sum(a[i] * H.entries[i][j] for i in range(n))) < tol
        # column orthonormality
        for j in range(n - 1):
            for k in range(j, n - 1):
                dot = sum(H.entries[i][j] * H.entries[i][k] for i in range(n))
                ok &= abs(dot - (1 if j == k else 0)) < tol
        # closed-form norms vs entrywise sums
        f_h, f_inv = fro_norms(alpha)
        ok &= abs(_frob([r[: n - 1] for r in H.entries[: n - 1]]) - f_h) < tol
        ok &= abs(_frob(principal_inverse(alpha)) - f_inv) < tol
    report("hyperplane identities (kernel, orthonormality, norms)", ok)
    return ok


def _check_reduction(ctx, rng, report):
    ok = True
    for n in (3, 5, 7):
        alpha = _random_alpha(rng, n, ctx)
        state = PslqState.start(build_h(alpha), ctx.real(2), alpha=alpha, trace=True)
        tau = 1 / ctx.sqrt(ctx.real(1) / 4 + ctx.real(1) / 4)
        prev_pi = pi_function(state.matrix(), 2)
        prev_hmax = state.h_max()
        for _ in range(25):
            if abs(state.h_nn1) < ctx.real(10) ** (-(ctx.digits - 8)):
                break
            iterate(state)
            d = state.trace[-1]
            ok &= d.h_max <= prev_hmax * (1 + ctx.eps * 10)
            ok &= prev_pi > tau * d.pi_value
            ok &= d.gauge_lhs <= d.gauge_rhs * (1 + ctx.real(1e-10))
            ok &= _ab_is_identity(state)
            ok &= _half_bound(state)
            prev_pi, prev_hmax = d.pi_value, d.h_max
    report("reduction invariants (h_max, pi decay, gauge, A.B = I)", ok)
    return ok


def _ab_is_identity(state):
    n = state.n
    a, b = state.a, state.b
    for i in range(n):
        for j in range(n):
            if sum(a[i][k] * b[k][j] for k in range(n)) != (1 if i == j else 0):
                return False
    return True


def _half_bound(state):
    h = state.h
    n = state.n
    for i in range(n):
        for j in range(min(i, n - 1)):
            if abs(h[i][j]) > abs(h[j][j]) / 2 * (1 + state.ctx.eps * 10):
                return False
    return True


def _check_perturbation(ctx, rng, report):
    ok = True
    for _ in range(10):
        n = rng.randint(2, 8)
        alpha = _random_alpha(rng, n, ctx)
        eps1 = ctx.real(10) ** -rng.randint(6, 12)
        w = perturb(alpha.entries, eps1, rng.randint(0, 10**6))
        beta = normalize_and_permute(w, ctx)
        if beta.perm != alpha.perm:
            continue  # max position moved; lemma hypothesis broken
        diff = ctx.sqrt(
            sum((x - y) ** 2 for x, y in zip(alpha.entries, beta.entries))
        )
        Ha, Hb = build_h(alpha), build_h(beta)
        dF = _frob(
            [[x - y for x, y in zip(r1, r2)] for r1, r2 in zip(Ha.entries, Hb.entries)]
        )
        ok &= dF < h_perturbation_bound(n, max(diff, ctx.real(1e-30)))
    report("hyperplane perturbation bound (Monte Carlo)", ok)
    return ok


def _check_oracle_agreement(ctx, rng, report):
    ok = True
    for _ in range(5):
        n = rng.randint(3, 4)
        m_true = [rng.randint(-10, 10) for _ in range(n - 1)] + [rng.randint(1, 10)]
        basis = [ctx.real(rng.uniform(0.5, 2.0)) for _ in range(n - 1)]
        last = -sum(b * c for b, c in zip(basis, m_true[:-1])) / m_true[-1]
        v = basis + [last]
        if abs(last) < ctx.real("1e-3"):
            continue
        found = brute_force_relation(v, 30, ctx.real("1e-20"))
        alpha = normalize_and_permute(v, ctx)
        res = run_pslq_epsilon(build_h(alpha), ctx.real("1e-25"), alpha=alpha)
        ok &= found is not None and res.found
        if res.found:
            ok &= verify_relation(v, res.m) < ctx.real("1e-20")
    report("oracle agreement on planted relations", ok)
    return ok


def run_selftest(verbose=False, seed=20240817):
    rng = random.Random(seed)
    ctx = with_precision(DIGITS)
    results = []

    def report(name, ok):
        results.append(ok)
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}")

    _check_hyperplane(ctx, rng, report)
    _check_reduction(ctx, rng, report)
    _check_perturbation(ctx, rng, report)
    _check_oracle_agreement(ctx, rng, report)
    ok = all(results)
    if verbose:
        print("selftest:", "all suites passed" if ok else "FAILURES above")
    return ok
