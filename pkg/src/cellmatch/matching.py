"""Many-to-one user/small-cell matching with externalities.

Users propose, small cells hold their best applicants up to quota. Because
both sides' utilities depend on the current association, the proposal game
is re-run on refreshed preferences until the association stops changing or
starts to cycle.
"""

import enum
import io
import itertools
import math
import weakref
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np

from cellmatch import geometry, handover
from cellmatch.scenario import MACRO
from cellmatch.utility import rate_utility


@dataclass(frozen=True)
class Matching:
    """Cell id per user; ``MACRO`` (0) is the fallback for unmatched users."""

    assignment: Tuple[int, ...]
    num_cells: int

    @classmethod
    def all_macro(cls, num_users, num_cells):
        return cls((MACRO,) * num_users, num_cells)

    @classmethod
    def from_members(cls, members, num_users, num_cells):
        """Build from a mapping pico id -> iterable of users."""
        assignment = [MACRO] * num_users
        for j, users in members.items():
            for i in users:
                if assignment[i] != MACRO:
                    raise ValueError(f"user {i} assigned twice")
                assignment[i] = j
        return cls(tuple(assignment), num_cells)

    @property
    def num_users(self):
        return len(self.assignment)

    def cell_of(self, i):
        return self.assignment[i]

    @cached_property
    def loads(self):
        return np.bincount(np.asarray(self.assignment, dtype=int), minlength=self.num_cells)

    @cached_property
    def _members(self):
        out = [[] for _ in range(self.num_cells)]
        for i, j in enumerate(self.assignment):
            out[j].append(i)
        return tuple(tuple(m) for m in out)

    def members(self, j):
        return self._members[j]

    def check(self, quotas):
        """Raise if a pico is over quota or an id is out of range."""
        for i, j in enumerate(self.assignment):
            if not 0 <= j < self.num_cells:
                raise ValueError(f"user {i} mapped to unknown cell {j}")
        for j in range(1, self.num_cells):
            if self.loads[j] > quotas[j]:
                raise ValueError(f"cell {j} holds {self.loads[j]} users, quota {quotas[j]}")

    def to_csv(self, utilities=None):
        buf = io.StringIO()
        buf.write("user_id,cell_id,utility\n")
        for i, j in enumerate(self.assignment):
            u = "" if utilities is None else repr(float(utilities[i]))
            buf.write(f"{i},{j},{u}\n")
        return buf.getvalue()


# ---------------------------------------------------------------------------
# Admission: matching-independent parts cached per scenario

@dataclass(frozen=True)
class _Admission:
    eligible: np.ndarray  # users x cells: candidate (and inside coverage when gated)
    m2p_ok: np.ndarray  # per cell
    p2p_ok: np.ndarray  # cells x cells, [source, target]
    rate_util: np.ndarray  # users x cells
    scbs_static: np.ndarray  # users x cells, cos(theta) / (V * tau)


_admission_cache = weakref.WeakKeyDictionary()


def _admission(scenario):
    try:
        return _admission_cache[scenario]
    except KeyError:
        pass
    cfg = scenario.config
    N, C = scenario.num_users, len(scenario.cells)
    eligible = np.zeros((N, C), dtype=bool)
    scbs_static = np.full((N, C), np.nan)
    floor = 10.0 ** (cfg.min_sinr / 10.0)
    for i, u in enumerate(scenario.users):
        for j in range(1, C):
            cell = scenario.cells[j]
            theta = u.directions[j - 1]
            t_T = geometry.interaction_time(cell.coverage_radius, theta, u.speed)
            ok = geometry.classify_visitor(t_T, cfg.prep_time) is geometry.Visitor.CANDIDATE
            if cfg.coverage_gate:
                ok = ok and scenario.distances[i, j] <= cell.coverage_radius
            if cfg.sinr_gate:
                ok = ok and scenario.sinr[i, j] >= floor
            eligible[i, j] = ok
            scbs_static[i, j] = math.cos(theta) / (u.speed * u.tau)

    m2p_ok = np.zeros(C, dtype=bool)
    p2p_ok = np.zeros((C, C), dtype=bool)
    v_min, v_max = (v / 3.6 for v in cfg.speed_range)
    for j in range(1, C):
        cj = scenario.cells[j]
        m2p_ok[j] = handover.hf_prob_m2p(cj.hf_radius, cj.coverage_radius) <= cfg.hf_threshold
        for k in range(1, C):
            if k == j:
                continue
            ck = scenario.cells[k]
            g = handover.P2PGeometry(
                R1=ck.coverage_radius, r1_exit=cfg.exit_ratio * ck.coverage_radius,
                R2=cj.coverage_radius, r2=cj.hf_radius,
                center_distance=math.dist(ck.position, cj.position),
                T_p1=cfg.prep_time, v_min=v_min, v_max=v_max)
            p2p_ok[k, j] = handover.p2p_feasible(g) and handover.hf_prob_p2p(g) <= cfg.hf_threshold

    rate_util = np.zeros((N, C))
    for i, u in enumerate(scenario.users):
        alpha, beta, lam = u.shape
        rate_util[i] = rate_utility(scenario.rates[i], u.target_rate, cfg.K, alpha, beta, lam)

    adm = _Admission(eligible, m2p_ok, p2p_ok, rate_util, scbs_static)
    _admission_cache[scenario] = adm
    return adm


def acceptable_mask(matching, scenario):
    """Users x cells boolean: may cell ``j`` admit user ``i`` under ``matching``.

    Staying needs only eligibility; moving from the macro needs the
    macro-to-pico failure probability under threshold, moving between picos
    needs a feasible pico-to-pico geometry under threshold.
    """
    adm = _admission(scenario)
    cur = np.asarray(matching.assignment, dtype=int)
    mask = adm.eligible.copy()
    if mask.size == 0:
        return mask
    N, C = mask.shape
    handover_ok = np.where((cur == MACRO)[:, None], adm.m2p_ok[None, :], adm.p2p_ok[cur, :])
    handover_ok[np.arange(N), cur] = True
    mask &= handover_ok
    mask[:, MACRO] = False
    return mask


def acceptable_set(j, matching, scenario):
    return frozenset(np.flatnonzero(acceptable_mask(matching, scenario)[:, j]).tolist())


def user_utility_matrix(matching, scenario):
    """Users x cells user utilities under ``matching``.

    The load seen in cell ``j`` excludes user ``i`` itself; the macro column
    carries the rate term only since the macro has no quota to price.
    """
    adm = _admission(scenario)
    cfg = scenario.config
    N = scenario.num_users
    cur = np.asarray(matching.assignment, dtype=int)
    loads = np.broadcast_to(matching.loads, (N, len(scenario.cells))).astype(float)
    if N:
        loads[np.arange(N), cur] -= 1
    cost = -cfg.load_sign * cfg.gamma * (scenario.quotas[None, :] - loads)
    U = adm.rate_util + cost
    U[:, MACRO] = adm.rate_util[:, MACRO]
    return U


def scbs_utility_matrix(matching, scenario, origin=None):
    """Users x cells small-cell utilities under ``matching`` (macro column NaN).

    The user's previous cell is its current one unless ``origin`` fixes it.
    """
    adm = _admission(scenario)
    cur = np.asarray(matching.assignment if origin is None else [origin] * scenario.num_users, dtype=int)
    prev_load = np.maximum(1, matching.loads[cur])
    prev_quota = scenario.quotas[cur]
    bracket = 1.0 + np.log(prev_load / prev_quota) / math.log(scenario.config.log_base)
    return adm.scbs_static * bracket[:, None]


# ---------------------------------------------------------------------------
# Preferences and deferred acceptance

@dataclass(frozen=True)
class PreferenceProfile:
    """Strict ranked lists; ``cell_prefs[0]`` (the macro) is always empty."""

    user_prefs: Tuple[Tuple[int, ...], ...]
    cell_prefs: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        for who, lists in (("user", self.user_prefs), ("cell", self.cell_prefs)):
            for k, lst in enumerate(lists):
                if len(set(lst)) != len(lst):
                    raise ValueError(f"{who} {k} has duplicate entries")
        if self.cell_prefs and self.cell_prefs[MACRO]:
            raise ValueError("the macro does not rank users")

    def check_ids(self):
        N, C = len(self.user_prefs), len(self.cell_prefs)
        for i, lst in enumerate(self.user_prefs):
            for j in lst:
                if not 0 < j < C:
                    raise ValueError(f"user {i} lists unknown cell {j}")
        for j, lst in enumerate(self.cell_prefs):
            for i in lst:
                if not 0 <= i < N:
                    raise ValueError(f"cell {j} lists unknown user {i}")


def build_preferences(matching, scenario):
    """Rank mutually acceptable partners by utility under ``matching``.

    Ties go to the lower id on both sides.
    """
    acc = acceptable_mask(matching, scenario)
    U = user_utility_matrix(matching, scenario)
    S = scbs_utility_matrix(matching, scenario)
    C = len(scenario.cells)
    cell_prefs = [()]
    for j in range(1, C):
        users = np.flatnonzero(acc[:, j]).tolist()
        cell_prefs.append(tuple(sorted(users, key=lambda i: (-S[i, j], i))))
    user_prefs = []
    for i in range(scenario.num_users):
        cells = np.flatnonzero(acc[i]).tolist()
        if scenario.config.user_ir:
            cells = [j for j in cells if U[i, j] > U[i, MACRO]]
        user_prefs.append(tuple(sorted(cells, key=lambda j: (-U[i, j], j))))
    return PreferenceProfile(tuple(user_prefs), tuple(cell_prefs))


@dataclass(frozen=True)
class ProposalLog:
    rounds: int
    proposals: Tuple[int, ...]  # per user


def run_deferred_acceptance(prefs, quotas, trace=None):
    """User-proposing deferred acceptance in synchronous rounds.

    Returns ``(matching, log)``. When ``trace`` is a list, a copy of every
    cell's waiting list is appended to it after each round.
    """
    prefs.check_ids()
    N, C = len(prefs.user_prefs), len(prefs.cell_prefs)
    rank = [{i: r for r, i in enumerate(lst)} for lst in prefs.cell_prefs]
    nxt = [0] * N
    proposals = [0] * N
    held = [[] for _ in range(C)]
    free = [i for i in range(N) if prefs.user_prefs[i]]
    rounds = 0
    while free:
        rounds += 1
        applicants = {}
        for i in free:
            j = prefs.user_prefs[i][nxt[i]]
            nxt[i] += 1
            proposals[i] += 1
            applicants.setdefault(j, []).append(i)
        rejected = []
        for j, new in applicants.items():
            pool = held[j] + [i for i in new if i in rank[j]]
            rejected.extend(i for i in new if i not in rank[j])
            pool.sort(key=rank[j].__getitem__)
            held[j] = pool[:quotas[j]]
            rejected.extend(pool[quotas[j]:])
        if trace is not None:
            trace.append([list(h) for h in held])
        free = sorted(i for i in rejected if nxt[i] < len(prefs.user_prefs[i]))

    assignment = [MACRO] * N
    for j in range(1, C):
        for i in held[j]:
            assignment[i] = j
    return Matching(tuple(assignment), C), ProposalLog(rounds, tuple(proposals))


def deferred_acceptance(prefs, quotas):
    return run_deferred_acceptance(prefs, quotas)[0]


# ---------------------------------------------------------------------------
# Outer loop

class Outcome(enum.Enum):
    CONVERGED = "converged"
    CYCLE_DETECTED = "cycle"
    ITERATION_CAP_HIT = "cap"


@dataclass(frozen=True)
class SolveResult:
    matching: Matching
    outcome: Outcome
    outer_iterations: int
    inner_rounds: Tuple[int, ...]
    applications: Tuple[int, ...]  # per outer iteration, summed over users

    @property
    def iterations_per_user(self):
        """Mean number of applications a user sends before settling.

        A user that ends on the macro counts its fallback as one application.
        A closing pass that only reproduces the previous matching confirms
        convergence and is not counted.
        """
        counted = self.applications
        if self.outcome is Outcome.CONVERGED and len(counted) > 1:
            counted = counted[:-1]
        n = self.matching.num_users
        return sum(counted) / n if n else 0.0


def average_user_utility(matching, scenario):
    if scenario.num_users == 0:
        return 0.0
    U = user_utility_matrix(matching, scenario)
    return float(U[np.arange(scenario.num_users), list(matching.assignment)].mean())


def solve(scenario, max_outer=None):
    """Iterate preference refresh + deferred acceptance from the all-macro start."""
    if max_outer is None:
        max_outer = scenario.config.max_outer
    mu = Matching.all_macro(scenario.num_users, len(scenario.cells))
    history = [mu]
    seen = {mu: 0}
    rounds, applications = [], []
    for t in range(1, max_outer + 1):
        prefs = build_preferences(mu, scenario)
        nxt, log = run_deferred_acceptance(prefs, scenario.quotas)
        rounds.append(log.rounds)
        applications.append(sum(log.proposals) + sum(1 for j in nxt.assignment if j == MACRO))
        if nxt == mu:
            return SolveResult(mu, Outcome.CONVERGED, t, tuple(rounds), tuple(applications))
        if nxt in seen:
            cycle = history[seen[nxt]:]
            best = max(cycle, key=lambda m: average_user_utility(m, scenario))
            return SolveResult(best, Outcome.CYCLE_DETECTED, t, tuple(rounds), tuple(applications))
        seen[nxt] = len(history)
        history.append(nxt)
        mu = nxt
    return SolveResult(mu, Outcome.ITERATION_CAP_HIT, max_outer, tuple(rounds), tuple(applications))


# ---------------------------------------------------------------------------
# Stability

def is_stable(matching, scenario):
    """Blocking pairs ``(i, j)`` of ``matching``; empty means stable.

    Both sides compare partners with utilities evaluated at ``matching``
    itself. A cell only blocks with users it may admit.
    """
    acc = acceptable_mask(matching, scenario)
    U = user_utility_matrix(matching, scenario)
    S = scbs_utility_matrix(matching, scenario)
    quotas = scenario.quotas
    blocking = []
    for j in range(1, len(scenario.cells)):
        members = matching.members(j)
        has_room = len(members) < quotas[j]
        worst = min((S[k, j] for k in members), default=math.inf)
        for i in np.flatnonzero(acc[:, j]).tolist():
            cur = matching.assignment[i]
            if cur == j or not U[i, j] > U[i, cur]:
                continue
            if has_room or S[i, j] > worst:
                blocking.append((i, j))
    blocking.sort()
    return blocking


def is_stable_profile(matching, prefs, quotas):
    """Blocking pairs of ``matching`` under fixed preference lists."""
    user_rank = [{j: r for r, j in enumerate(lst)} for lst in prefs.user_prefs]
    cell_rank = [{i: r for r, i in enumerate(lst)} for lst in prefs.cell_prefs]
    blocking = []
    for i, lst in enumerate(prefs.user_prefs):
        cur = matching.assignment[i]
        cur_rank = user_rank[i].get(cur, math.inf)
        for j in lst:
            if user_rank[i][j] >= cur_rank:
                break
            if i not in cell_rank[j]:
                continue
            members = matching.members(j)
            if len(members) < quotas[j] or any(cell_rank[j][i] < cell_rank[j][k] for k in members):
                blocking.append((i, j))
    return blocking


def _feasible_assignments(N, C, quotas, allowed):
    """All assignments with user ``i`` on a cell in ``allowed[i]`` and quotas met."""
    choices = [[MACRO] + [j for j in range(1, C) if allowed[i][j]] for i in range(N)]
    for combo in itertools.product(*choices):
        counts = np.bincount(np.asarray(combo, dtype=int), minlength=C)
        if all(counts[j] <= quotas[j] for j in range(1, C)):
            yield Matching(tuple(combo), C)


def _guard(N, P, quotas):
    if N > 8 or P > 3 or max(list(quotas[1:]) or [0]) > 2:
        raise ValueError("brute force limited to N <= 8, P <= 3, quota <= 2")


def brute_force_stable(scenario):
    """Every quota-feasible matching with no blocking pair.

    Users are only placed on cells they are eligible for.
    """
    N, C = scenario.num_users, len(scenario.cells)
    _guard(N, C - 1, scenario.quotas)
    allowed = _admission(scenario).eligible
    return {m for m in _feasible_assignments(N, C, scenario.quotas, allowed) if not is_stable(m, scenario)}


def brute_force_stable_profile(prefs, quotas):
    """Classical stable set for fixed lists: mutually acceptable pairs only."""
    N, C = len(prefs.user_prefs), len(prefs.cell_prefs)
    _guard(N, C - 1, quotas)
    allowed = [[j in prefs.user_prefs[i] and i in prefs.cell_prefs[j] for j in range(C)] for i in range(N)]
    return {m for m in _feasible_assignments(N, C, quotas, allowed)
            if not is_stable_profile(m, prefs, quotas)}


def user_optimal(matchings, prefs):
    """The member of ``matchings`` every user weakly prefers, or None."""
    ranks = [{j: r for r, j in enumerate(lst)} for lst in prefs.user_prefs]

    def rank(m, i):
        return ranks[i].get(m.assignment[i], math.inf)

    for m in matchings:
        if all(rank(m, i) <= rank(o, i) for o in matchings for i in range(m.num_users)):
            return m
    return None
