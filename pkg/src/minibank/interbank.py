"""Interbank credit: the outstanding-loan ledger, stochastic repayment, and
the per-period reserve pooling that matches surplus banks to shortage banks.

The ledger is the book of record for interbank positions: every update to
the balance-sheet items a3 and l3 goes through it, so per-bank ledger sums
and sheet items agree at all times.  Reserve transfers settle partly in
claims held on third banks; those legs are implemented as reassignment of
ledger entries from one creditor to another, with claims a bank would end
up holding on itself cancelled outright.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, LedgerError
from .ledger import BankBalanceSheets, ReserveBase, reserve_weights, sum_reserve
from .stochastics import keyed_threshold_draw, uniform_matrix


class LoanKind(Enum):
    WIRE = "wire"          # created by netting wire-transfer payments
    POOLED = "pooled"      # created by the reserve pooling system
    ROLLOVER = "rollover"  # refinancing of a repayment the borrower could not fund


_KIND_ORDER = {LoanKind.WIRE: 0, LoanKind.POOLED: 1, LoanKind.ROLLOVER: 2}


class MatchingMode(Enum):
    EXOGENOUS = "exogenous"    # i.i.d. uniform match scores
    ENDOGENOUS = "endogenous"  # preferential attachment on equity and exposure


class InterbankLoanLedger:
    """Sparse record of outstanding interbank loans.

    Positions are keyed (lender, borrower, issue period, kind) and carry the
    borrower's reserve-component weights snapshotted when the position was
    created; repayments settle against that snapshot.  Positions that share
    a key merge, which keeps the ledger size bounded no matter how often
    claims get reassigned between creditors.
    """

    def __init__(self, n_banks: int):
        self.n_banks = n_banks
        self._amounts: dict[tuple[int, int, int, LoanKind], float] = {}
        self._weights: dict[tuple[int, int, LoanKind], np.ndarray] = {}
        self._by_lender: list[set] = [set() for _ in range(n_banks)]

    def __len__(self) -> int:
        return len(self._amounts)

    def add(self, lender: int, borrower: int, period: int, kind: LoanKind,
            amount: float, weights: np.ndarray) -> None:
        if amount <= 0:
            return
        if lender == borrower:
            raise LedgerError("a bank cannot lend to itself")
        key = (int(lender), int(borrower), int(period), kind)
        wkey = key[1:]
        w = np.asarray(weights, dtype=float)
        existing = self._weights.get(wkey)
        if existing is None:
            self._weights[wkey] = w.copy()
        elif not np.array_equal(existing, w):
            raise LedgerError(f"conflicting weight snapshots for issuance {wkey}")
        self._amounts[key] = self._amounts.get(key, 0.0) + float(amount)
        self._by_lender[key[0]].add(key)

    def amount(self, key) -> float:
        return self._amounts.get(key, 0.0)

    def weights_for(self, key) -> np.ndarray:
        return self._weights[key[1:]]

    def reduce(self, key, amount: float) -> None:
        left = self._amounts[key] - amount
        if left <= 0.0:
            del self._amounts[key]
            self._by_lender[key[0]].discard(key)
        else:
            self._amounts[key] = left

    @staticmethod
    def _canonical(key) -> tuple:
        return (key[2], key[0], key[1], _KIND_ORDER[key[3]])

    def sorted_keys(self) -> list:
        """All outstanding positions in canonical (issue period, lender,
        borrower, kind) order; every mutation pass iterates in this order."""
        return sorted(self._amounts, key=self._canonical)

    def keys_by_lender(self, lender: int) -> list:
        return sorted(self._by_lender[lender], key=self._canonical)

    def lender_sums(self) -> np.ndarray:
        out = np.zeros(self.n_banks)
        for (lender, _, _, _), amount in self._amounts.items():
            out[lender] += amount
        return out

    def borrower_sums(self) -> np.ndarray:
        out = np.zeros(self.n_banks)
        for (_, borrower, _, _), amount in self._amounts.items():
            out[borrower] += amount
        return out

    def total(self) -> float:
        return float(sum(self._amounts.values()))

    def copy(self) -> "InterbankLoanLedger":
        clone = InterbankLoanLedger(self.n_banks)
        clone._amounts = dict(self._amounts)
        clone._weights = {k: v.copy() for k, v in self._weights.items()}
        clone._by_lender = [set(s) for s in self._by_lender]
        return clone

    def reassign_claims(self, from_bank: int, to_bank: int, requested: float,
                        include_self: bool = True) -> tuple[float, float]:
        """Move claims held by ``from_bank`` to ``to_bank``, oldest first,
        up to the requested amount (at most the last claim taken is split).

        Claims on ``to_bank`` itself are taken only once every claim on a
        third bank is exhausted (never when ``include_self`` is off), and
        are cancelled instead of moved: a creditor swap would make to_bank
        its own debtor.  Returns ``(moved, cancelled)``: moved is the total
        taken out of from_bank's claims, of which cancelled was extinguished
        rather than transferred.  The caller applies the matching a3/l3
        sheet updates.
        """
        if requested <= 0:
            return 0.0, 0.0
        if from_bank == to_bank:
            raise LedgerError("cannot reassign claims to their current holder")
        keys = self.keys_by_lender(from_bank)
        if not include_self:
            keys = [k for k in keys if k[1] != to_bank]
        else:
            keys.sort(key=lambda k: k[1] == to_bank)  # stable: third-party claims first
        if not keys:
            return 0.0, 0.0
        available = sum(self._amounts[k] for k in keys)
        take = min(requested, available)
        if take <= 0:
            return 0.0, 0.0
        moved = 0.0
        cancelled = 0.0
        for key in keys:
            part = min(take - moved, self._amounts[key])
            if part <= 0:
                break
            _, borrower, period, kind = key
            self.reduce(key, part)
            if borrower == to_bank:
                cancelled += part
            else:
                self.add(to_bank, borrower, period, kind, part, self._weights[(borrower, period, kind)])
            moved += part
        return moved, cancelled

    def check_consistency(self, banks: BankBalanceSheets, rtol: float = 1e-9) -> float:
        """Assert per-bank ledger sums match a3/l3; returns the max residual."""
        scale = np.maximum(1.0, np.abs(banks.snapshot()).sum(axis=1))
        lender_res = np.abs(self.lender_sums() - banks.a3) / scale
        borrower_res = np.abs(self.borrower_sums() - banks.l3) / scale
        worst = float(max(lender_res.max(), borrower_res.max()))
        if worst > rtol:
            bank = int(np.argmax(np.maximum(lender_res, borrower_res)))
            raise LedgerError(
                f"ledger out of sync with balance sheets at bank {bank} "
                f"(relative residual {worst:.3e})"
            )
        return worst


@dataclass(frozen=True)
class InterbankRepaymentStats:
    repaid_volume: float
    repaid_count: int
    rollover_volume: float
    cancelled_volume: float


def repay_interbank_loans(banks: BankBalanceSheets, loans: InterbankLoanLedger,
                          omega: float, base: ReserveBase, period: int,
                          decision_seed: int) -> InterbankRepaymentStats:
    """Repay a random selection of outstanding interbank loans in full.

    Every position at least one period old draws once against the repayment
    likelihood ``omega``; positions whose draw strictly exceeds omega settle
    now (omega = 0 repays everything, omega = 1 repays nothing).  Each
    position's draw is keyed to its identity, so a loan's repayment timing
    never depends on what other loans happen to exist, and runs sharing a
    seed repay their common positions identically across scenario variants.
    The borrower pays with its reserve components in the proportions
    recorded at issuance.  Currency and retail-loan legs are capped at what
    the borrower actually holds, with any shortfall carried on the claims
    leg; whatever the borrower's own claims cannot cover is refinanced on
    the spot as a fresh loan from the same lender.  No reserve component is
    ever driven negative and the ledger keeps matching the sheets exactly.
    """
    due = []
    for key in loans.sorted_keys():
        lender, borrower, issued, kind = key
        if issued >= period:
            continue
        draw = keyed_threshold_draw(decision_seed, period, lender, borrower,
                                    issued, _KIND_ORDER[kind])
        if draw > omega:
            due.append((key, loans.amount(key)))
    if not due:
        return InterbankRepaymentStats(0.0, 0, 0.0, 0.0)

    # One weight snapshot per phase backs every refinancing made during it.
    rollover_weights = reserve_weights(banks, base)

    repaid = 0.0
    count = 0
    rolled = 0.0
    cancelled_total = 0.0
    for key, frozen in due:
        # Earlier settlements may have reassigned part of this position away;
        # only what is still here, up to the amount selected, settles now.
        amount = min(frozen, loans.amount(key))
        if amount <= 0:
            continue
        lender, borrower, _, _ = key
        legs = amount * loans.weights_for(key)
        a1_leg = min(legs[0], max(banks.a1[borrower], 0.0))
        a2_leg = min(legs[1], max(banks.a2[borrower], 0.0))
        claim_target = legs[2] + (legs[0] - a1_leg) + (legs[1] - a2_leg)

        loans.reduce(key, amount)
        moved, cancelled = loans.reassign_claims(borrower, lender, claim_target)
        deficit = max(claim_target - moved, 0.0)
        if deficit > 0:
            loans.add(lender, borrower, period, LoanKind.ROLLOVER, deficit,
                      rollover_weights[borrower])
            rolled += deficit

        banks.a1[borrower] -= a1_leg
        banks.a1[lender] += a1_leg
        banks.a2[borrower] -= a2_leg
        banks.a2[lender] += a2_leg
        banks.a3[borrower] -= moved
        banks.a3[lender] += moved - cancelled + deficit - amount
        banks.l3[lender] -= cancelled
        banks.l3[borrower] -= amount - deficit

        repaid += amount
        count += 1
        cancelled_total += cancelled
    return InterbankRepaymentStats(repaid, count, rolled, cancelled_total)


@dataclass(frozen=True)
class PoolingState:
    """One period's pooling snapshot, taken after interbank repayment."""

    base: ReserveBase
    current_ratio: np.ndarray   # reserve holding over deposits (inf when no deposits)
    excess: np.ndarray          # lendable surplus per bank, zero unless above target
    need: np.ndarray            # reserve shortfall per bank, zero unless below target
    target_reserve: np.ndarray  # target ratio times deposits
    weights: np.ndarray         # (B, 3) lender transfer profile
    potential: np.ndarray       # (B, B) bool, lender rows x borrower columns
    selection: np.ndarray       # (B, B) match scores, zero outside potential pairs
    actual: np.ndarray          # (B, B) bool, the pairs that will trade
    phi: float


def compute_pooling_state(banks: BankBalanceSheets, base: ReserveBase, target_ratio,
                          phi: float, matching: MatchingMode, rng: np.random.Generator,
                          alpha: float | None = None, lam: float | None = None) -> PoolingState:
    """Split banks into lenders and borrowers and select the pairs that trade.

    Surplus and shortage are measured against the target reserve (a bank
    with no deposits but positive reserves counts as surplus, with its whole
    holding lendable).  The potential matrix pairs every surplus bank with
    every shortage bank.  Match scores come either from one uniform draw per
    matrix cell on (0, 1] (a fixed-size draw, so runs sharing a seed remain
    comparable across phi), or from the preferential-attachment rule on the
    lender's equity ratio and the borrower's interbank exposure; a lender
    with no positive equity scores zero and is never selected.  Pairs whose
    score strictly exceeds phi trade: phi = 0 keeps every potential pair and
    phi = 1 rules out interbank credit entirely under uniform scores.
    """
    B = banks.n_banks
    reserve = sum_reserve(banks, base)
    dep = banks.deposits()
    target = np.asarray(target_ratio * dep, dtype=float)

    surplus = reserve > target
    shortage = reserve < target
    excess = np.where(surplus, reserve - target, 0.0)
    need = np.where(shortage, target - reserve, 0.0)

    ratio = np.zeros(B)
    has_dep = dep > 0
    ratio[has_dep] = reserve[has_dep] / dep[has_dep]
    ratio[~has_dep & (reserve > 0)] = np.inf

    potential = surplus[:, None] & shortage[None, :]

    if matching is MatchingMode.EXOGENOUS:
        scores = 1.0 - uniform_matrix(B, B, rng)
    else:
        if alpha is None or not alpha > 0:
            raise ConfigError("alpha: endogenous matching needs alpha > 0")
        if lam is None or not lam > 0:
            raise ConfigError("lambda: endogenous matching needs lambda > 0")
        liabilities = banks.l1 + banks.l2 + banks.l3 + banks.l5
        equity_ratio = np.divide(banks.l4, liabilities, out=np.zeros(B), where=liabilities > 0)
        np.maximum(equity_ratio, 0.0, out=equity_ratio)
        exposure = np.divide(banks.l3, liabilities, out=np.zeros(B), where=liabilities > 0)
        with np.errstate(divide="ignore"):
            lender_term = alpha * np.power(equity_ratio, -alpha)
        distance = lender_term[:, None] + alpha * np.power(exposure, alpha)[None, :]
        scores = lam * np.exp(-lam * distance)

    scores = np.where(potential, scores, 0.0)
    actual = potential & (scores > phi)
    return PoolingState(
        base=base,
        current_ratio=ratio,
        excess=excess,
        need=need,
        target_reserve=target,
        weights=reserve_weights(banks, base),
        potential=potential,
        selection=scores,
        actual=actual,
        phi=float(phi),
    )


@dataclass(frozen=True)
class PoolingStats:
    issued_volume: float
    issued_count: int
    cancelled_volume: float


def allocate_pooled_credit(banks: BankBalanceSheets, loans: InterbankLoanLedger,
                           state: PoolingState, period: int,
                           transfer_on_issue: bool = True):
    """Move pooled reserves from matched lenders to borrowers.

    Each borrower borrows its reserve shortfall, bounded by the total
    excess of the lenders it actually matched, split across them pro rata
    to their surpluses: a poorly connected borrower can only raise what its
    reachable corner of the pool holds.  An oversubscribed lender scales
    its borrowers back pro rata, so nobody lends beyond its surplus or
    borrows beyond its need.  The loan is booked as new interbank credit
    and the funds move as a transfer of reserve components, by default in
    the lender's snapshot proportions; a leg the lender cannot serve shifts
    onto its other components, so the full amount is delivered whenever the
    lender holds any mix of reserves to pay with.  Handing the borrower its
    own debt back (a cancellation rather than a delivery) is the last
    resort.  With ``transfer_on_issue`` off no reserves move at all: the
    proceeds are credited to an account the borrower holds at the lender,
    a mutual pair of gross positions that keeps both sheets balanced and
    delivers reserves only where such a claim itself counts as one.
    Returns each borrower's unmet reserve need, measured by delivered
    reserves so the guarantee that follows tops the borrower up to exactly
    its target, plus issuance statistics.
    """
    B = banks.n_banks
    borrowers = np.flatnonzero(state.need > 0)
    if borrowers.size == 0 or state.excess.sum() <= 0:
        return state.need.copy(), PoolingStats(0.0, 0, 0.0)

    grid = np.zeros((B, B))
    for b in borrowers:
        matched = np.flatnonzero(state.actual[:, b])
        if matched.size == 0:
            continue
        pool = state.excess[matched].sum()
        if pool <= 0:
            continue
        grid[matched, b] = min(state.need[b], pool) * state.excess[matched] / pool

    out_totals = grid.sum(axis=1)
    over = out_totals > state.excess
    if np.any(over):
        grid[over] *= (state.excess[over] / out_totals[over])[:, None]
    if np.any(grid < 0):
        raise LedgerError("negative pooled allocation")

    pairs = [(int(l), int(b), grid[l, b])
             for b in borrowers for l in np.flatnonzero(grid[:, b] > 0)]
    if not pairs:
        return state.need.copy(), PoolingStats(0.0, 0, 0.0)

    delivered = np.zeros(B)
    cancelled_total = 0.0
    in_base = state.base.component_mask
    if transfer_on_issue:
        for lender, borrower, amount in pairs:
            legs = amount * state.weights[lender]
            a1_move = min(legs[0], max(banks.a1[lender], 0.0))
            a2_move = min(legs[1], max(banks.a2[lender], 0.0))
            moved, _ = loans.reassign_claims(lender, borrower,
                                             amount - a1_move - a2_move,
                                             include_self=False)
            # whatever the third-party claims could not carry shifts back
            # onto currency, then retail loans, then the borrower's own debt
            residual = amount - a1_move - a2_move - moved
            if residual > 0 and in_base[0]:
                extra = min(residual, max(banks.a1[lender] - a1_move, 0.0))
                a1_move += extra
                residual -= extra
            if residual > 0 and in_base[1]:
                extra = min(residual, max(banks.a2[lender] - a2_move, 0.0))
                a2_move += extra
                residual -= extra
            cancelled = 0.0
            if residual > 0:
                moved_self, cancelled = loans.reassign_claims(lender, borrower, residual)
                moved += moved_self
            banks.a1[lender] -= a1_move
            banks.a1[borrower] += a1_move
            banks.a2[lender] -= a2_move
            banks.a2[borrower] += a2_move
            banks.a3[lender] -= moved
            banks.a3[borrower] += moved - cancelled
            banks.l3[borrower] -= cancelled
            cancelled_total += cancelled
            delivered[borrower] += (in_base[0] * a1_move + in_base[1] * a2_move
                                    + in_base[2] * (moved - cancelled))

    # Book the new positions once every transfer has landed, so one
    # post-transfer weight snapshot per borrower backs all of them.
    post_weights = reserve_weights(banks, state.base)
    issued = 0.0
    count = 0
    for lender, borrower, amount in pairs:
        loans.add(lender, borrower, period, LoanKind.POOLED, amount, post_weights[borrower])
        banks.a3[lender] += amount
        banks.l3[borrower] += amount
        if not transfer_on_issue:
            # the borrower's side of the cross deposit: a claim on the lender
            loans.add(borrower, lender, period, LoanKind.POOLED, amount,
                      post_weights[lender])
            banks.a3[borrower] += amount
            banks.l3[lender] += amount
            delivered[borrower] += in_base[2] * amount
        issued += amount
        count += 1

    unmet = np.maximum(state.need - delivered, 0.0)
    return unmet, PoolingStats(issued, count, cancelled_total)
