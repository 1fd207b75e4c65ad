"""Runtime checks of the Hoare-logic form of the analogy theorem.

Each check evaluates a triple ``{P} S {Q}`` over a finite set of states: the
states satisfying ``P`` are run through the transformer and ``Q`` is tested on
every successor (demonic reading) unless stated otherwise.  A passing report
means "verified on N states", not a proof.  A triple whose precondition
selects no state holds vacuously and is flagged as such.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analogy import ThresholdPredicate, distances_to
from .metric import as_sample, pairwise_distances
from .transformers import StateTransformer
from . import streams

__all__ = [
    "TripleReport",
    "EffectiveRegion",
    "check_c1",
    "check_c2",
    "check_u4",
    "check_u5",
    "check_u6",
    "check_u2_nondet",
    "effective_region",
    "default_pairs",
]


@dataclass(frozen=True)
class TripleReport:
    triple_id: str
    total: int
    satisfied: int
    counterexamples: list = field(default_factory=list)
    holds: bool = True
    vacuous: bool = False
    semantics: str = "demonic"
    note: str = ""

    def summary(self) -> str:
        verdict = "holds" if self.holds else f"FAILS ({len(self.counterexamples)} counterexamples)"
        extra = " [vacuous]" if self.vacuous else ""
        return f"{self.triple_id:<12} {verdict}{extra}, verified on {self.total} states"


def _flatten(succ: list[np.ndarray]):
    owner = np.repeat(np.arange(len(succ)), [len(s) for s in succ])
    return np.vstack(succ), owner


def _all_per_state(ok: np.ndarray, owner: np.ndarray, n: int) -> np.ndarray:
    return np.bincount(owner[~ok], minlength=n) == 0


def _any_per_state(ok: np.ndarray, owner: np.ndarray, n: int) -> np.ndarray:
    return np.bincount(owner[ok], minlength=n) > 0


def _report(triple_id: str, pre: np.ndarray, ok: np.ndarray, note: str = "", semantics: str = "demonic"):
    idx = np.flatnonzero(pre)
    bad = idx[~ok[idx]]
    total = int(idx.size)
    return TripleReport(
        triple_id=triple_id,
        total=total,
        satisfied=total - int(bad.size),
        counterexamples=bad.tolist(),
        holds=bad.size == 0,
        vacuous=total == 0,
        semantics=semantics,
        note=note,
    )


def _rounding_slack(X: np.ndarray, Z: np.ndarray) -> np.ndarray:
    scale = np.abs(X).sum(axis=1) + np.abs(Z).sum(axis=1)
    return 4 * np.finfo(float).eps * scale


def check_c1(sample, T: StateTransformer, gamma: float) -> TripleReport:
    """gamma-stability: every successor lies within gamma of its state.

    The comparison allows the rounding error of evaluating ``s' - s``
    (a few ulps of ``|s| + |s'|``), so a translation by a vector of norm
    exactly gamma passes.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    X = as_sample(sample)
    Z, owner = _flatten(T.successors(X))
    diff = Z - X[owner]
    disp = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    ok = _all_per_state(disp <= gamma + _rounding_slack(X[owner], Z), owner, len(X))
    return _report("C1", np.ones(len(X), bool), ok)


def check_c2(sample, T: StateTransformer, F: ThresholdPredicate) -> TripleReport:
    """F is preserved: F(s) implies F(s') for every successor s'."""
    X = as_sample(sample)
    Z, owner = _flatten(T.successors(X))
    ok = _all_per_state(F(Z), owner, len(X))
    return _report("C2", F(X), ok)


def check_u4(sample, T, s0, eps: float, gamma: float, F: ThresholdPredicate, L: ThresholdPredicate) -> TripleReport:
    """{d(s, s0) <= eps - gamma} S {F(s') <-> L(s')}."""
    if not eps > gamma >= 0:
        raise ValueError("U4 needs eps > gamma >= 0")
    X = as_sample(sample)
    pre = distances_to(X, s0) <= eps - gamma
    Z, owner = _flatten(T.successors(X))
    ok = _all_per_state(F(Z) == L(Z), owner, len(X))
    return _report("U4", pre, ok)


def check_u5(sample, T, s0, eps: float, gamma: float, F: ThresholdPredicate, L: ThresholdPredicate) -> TripleReport:
    """{d(s, s0) > eps + gamma and F(s)} S {not L(s')}.

    This triple rests on the strengthened preservation assumption that no
    program run brings a far state back into L; here it is checked on data.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    X = as_sample(sample)
    pre = (distances_to(X, s0) > eps + gamma) & F(X)
    Z, owner = _flatten(T.successors(X))
    ok = _all_per_state(~L(Z), owner, len(X))
    return _report("U5", pre, ok, note="relies on the strengthened preservation condition")


def check_u6(A, B, T, delta: float, gamma: float, F: ThresholdPredicate) -> TripleReport:
    """{d(s1, s2) < delta - 2 gamma} S {F(s1') <-> F(s2')} over state pairs (A[k], B[k]).

    With several successors every combination must agree, i.e. all successors
    of both states carry the same F value.  Counterexamples are pair indices.
    """
    if not delta > 2 * gamma:
        raise ValueError("U6 needs delta > 2 gamma")
    if len(A) == 0:
        return TripleReport("U6", 0, 0, [], True, True)
    A = as_sample(A, "A")
    B = as_sample(B, "B")
    if A.shape != B.shape:
        raise ValueError("pair arrays must have the same shape")
    diff = A - B
    pre = np.sqrt(np.einsum("ij,ij->i", diff, diff)) < delta - 2 * gamma
    k = len(A)
    # One batch for both ends, so each end is an independent run of S.
    Z, owner = _flatten(T.successors(np.vstack([A, B])))
    fz = F(Z)
    pair_owner = owner % k
    ok = _all_per_state(fz, pair_owner, k) | _all_per_state(~fz, pair_owner, k)
    return _report("U6", pre, ok)


def check_u2_nondet(
    sample,
    T: StateTransformer,
    s0,
    eps: float,
    delta: float,
    gamma: float,
    F: ThresholdPredicate,
    L: ThresholdPredicate,
    semantics: str = "demonic",
) -> TripleReport:
    """Violation reachability for a nondeterministic program.

    Precondition d(s, s0) <= delta - 2 gamma.  A state is covered when some
    successor s' has d(s', s0) > eps, F(s') and not L(s').  Demonic: every
    precondition state must be covered.  Angelic: at least one must be.
    """
    if T.deterministic:
        raise ValueError("use deterministic triples for a deterministic transformer")
    if semantics not in ("demonic", "angelic"):
        raise ValueError("semantics must be 'demonic' or 'angelic'")
    if not delta > 2 * gamma:
        raise ValueError("U2 needs delta > 2 gamma")
    X = as_sample(sample)
    pre = distances_to(X, s0) <= delta - 2 * gamma
    Z, owner = _flatten(T.successors(X))
    bad_succ = (distances_to(Z, s0) > eps) & F(Z) & ~L(Z)
    covered = _any_per_state(bad_succ, owner, len(X))
    tid = f"U2-{semantics}"
    if semantics == "demonic":
        return _report(tid, pre, covered, semantics=semantics)
    idx = np.flatnonzero(pre)
    hits = int(covered[idx].sum())
    holds = hits > 0
    return TripleReport(
        triple_id=tid,
        total=int(idx.size),
        satisfied=hits,
        counterexamples=[] if holds else idx.tolist(),
        holds=holds,
        vacuous=idx.size == 0,
        semantics=semantics,
        note="existential: one covered state suffices",
    )


@dataclass(frozen=True)
class EffectiveRegion:
    eps_prime: float
    delta_prime: float
    valid: bool


def effective_region(eps: float, delta: float, gamma: float) -> EffectiveRegion:
    """Shrunken analogy region after a gamma-stable program: (eps - gamma, delta - 2 gamma)."""
    if min(eps, delta, gamma) < 0:
        raise ValueError("eps, delta and gamma must be >= 0")
    return EffectiveRegion(eps - gamma, delta - 2 * gamma, gamma < min(eps, delta / 2))


def default_pairs(sample, budget: int = 10_000, seed: int = 0, radius: float | None = None):
    """State pairs for U6, returned as ``(A, B, index_pairs)``.

    Candidates are all pairs i < j, or only those closer than ``radius`` when
    given (pairs farther apart never meet the U6 precondition).  Above
    ``budget`` candidates, a seeded subsample is kept in index order.
    """
    X = as_sample(sample)
    n = len(X)
    if radius is None:
        i, j = np.triu_indices(n, k=1)
    else:
        parts_i, parts_j = [], []
        for start in range(0, n, 512):
            D = pairwise_distances(X[start : start + 512], X)
            ii, jj = np.nonzero(D < radius)
            ii = ii + start
            keep = ii < jj
            parts_i.append(ii[keep])
            parts_j.append(jj[keep])
        i = np.concatenate(parts_i) if parts_i else np.empty(0, int)
        j = np.concatenate(parts_j) if parts_j else np.empty(0, int)
    idx = np.column_stack([i, j]).astype(np.int64)
    if len(idx) > budget:
        g = streams.rng(seed, streams.PAIRS, 1)
        keep = np.sort(g.choice(len(idx), size=budget, replace=False))
        idx = idx[keep]
    return X[idx[:, 0]], X[idx[:, 1]], idx
